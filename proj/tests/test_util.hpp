#pragma once

// Self-contained reference implementations used as test oracles. These stay
// independent of the library code paths they check: dense direct solvers, a
// Jacobi eigendecomposition, and closed-form monomial integrals.

#include "mhdnv/geom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

// Dense Gaussian elimination with partial pivoting. A is row-major n x n.
inline std::vector<double> dense_solve(std::vector<double> A, std::vector<double> b) {
    const int n = int(b.size());
    if (int(A.size()) != n * n)
        throw std::invalid_argument("dense_solve: bad sizes");
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k]))
                piv = i;
        if (A[piv * n + k] == 0.0)
            throw std::runtime_error("dense_solve: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j)
                std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = A[i * n + k] / A[k * n + k];
            for (int j = k; j < n; ++j)
                A[i * n + j] -= f * A[k * n + j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j)
            s -= A[i * n + j] * x[j];
        x[i] = s / A[i * n + i];
    }
    return x;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix: A = V diag(w) V'.
// V is returned row-major with eigenvectors in columns.
inline void symmetric_eig(std::vector<double> A, int n, std::vector<double>& w,
                          std::vector<double>& V) {
    V.assign(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        V[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += A[p * n + q] * A[p * n + q];
        if (off < 1e-30)
            break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = A[p * n + q];
                if (std::abs(apq) < 1e-300)
                    continue;
                const double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A[k * n + p], akq = A[k * n + q];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A[p * n + k], aqk = A[q * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V[k * n + p], vkq = V[k * n + q];
                    V[k * n + p] = c * vkp - s * vkq;
                    V[k * n + q] = s * vkp + c * vkq;
                }
            }
    }
    w.resize(n);
    for (int i = 0; i < n; ++i)
        w[i] = A[i * n + i];
}

// Minimum-norm least-squares solution via the eigendecomposition, dropping
// eigenvalues below `null_tol` times the largest. Oracle for singular
// (pure-Neumann) systems.
inline std::vector<double> pseudo_inverse_solve(const std::vector<double>& A, int n,
                                                const std::vector<double>& b,
                                                double null_tol = 1e-10) {
    std::vector<double> w, V;
    symmetric_eig(A, n, w, V);
    double wmax = 0.0;
    for (double x : w)
        wmax = std::max(wmax, std::abs(x));
    std::vector<double> x(n, 0.0);
    for (int k = 0; k < n; ++k) {
        if (std::abs(w[k]) <= null_tol * wmax)
            continue;
        double proj = 0.0;
        for (int i = 0; i < n; ++i)
            proj += V[i * n + k] * b[i];
        proj /= w[k];
        for (int i = 0; i < n; ++i)
            x[i] += proj * V[i * n + k];
    }
    return x;
}

// Exact integral of x^a over [0,1] and of x^a y^b over the unit triangle
// {x, y >= 0, x + y <= 1}: a! b! / (a + b + 2)!.
inline double monomial_integral_1d(int a) { return 1.0 / (a + 1); }

inline double monomial_integral_2d(int a, int b) {
    double v = 1.0;
    // a! b! / (a+b+2)! computed as a product to avoid factorial overflow.
    for (int i = 1; i <= a + b + 2; ++i)
        v /= i;
    for (int i = 1; i <= a; ++i)
        v *= i;
    for (int i = 1; i <= b; ++i)
        v *= i;
    return v;
}

// Relative difference guarded for tiny references.
inline double rel_diff(double got, double want, double floor_scale = 1.0) {
    return std::abs(got - want) / std::max(std::abs(want), floor_scale * 1e-300);
}

} // namespace oracle

#include "mhdnv/fespace.hpp"

namespace testutil {

// Mesh + space + fine-submesh geometry built in place (the space keeps a
// pointer to the mesh, so the bundle must never be moved after construction).
struct SpaceBundle {
    mhdnv::Triangulation mesh;
    mhdnv::LagrangeSpace space;
    mhdnv::Triangulation fine;
    mhdnv::PatchTable fine_patches;
    mhdnv::NodalGeometry geo;

    SpaceBundle(mhdnv::Triangulation m, int degree)
        : mesh(std::move(m)), space(mhdnv::build_space(mesh, degree)),
          fine(mhdnv::fine_submesh_aligned(space)),
          fine_patches(mhdnv::fine_dof_patches(space, fine)),
          geo(mhdnv::build_nodal_geometry(space, fine, fine_patches)) {}

    SpaceBundle(const SpaceBundle&) = delete;
    SpaceBundle& operator=(const SpaceBundle&) = delete;
};

} // namespace testutil
