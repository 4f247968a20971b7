#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mhdnv/viscosity.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace mhdnv;

using testutil::SpaceBundle;

namespace {

MhdField random_valid_field(int n, Rng& rng) {
    MhdField U(n);
    for (int i = 0; i < n; ++i) {
        const double rho = rng.uniform(0.2, 2.0);
        const Vec2 u{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double p = rng.uniform(0.1, 2.0);
        const Vec2 B{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        U.set_state(i, conserved_state(rho, u, p, B, 5.0 / 3.0));
    }
    return U;
}

} // namespace

TEST_CASE("first-order viscosity reduces to the Lax-Friedrichs coefficient") {
    // 1D uniform spacing h: eps * J^2 = h lambda / 2 with J = h.
    const int n = 16;
    const double h = 1.0 / n;
    SpaceBundle b(make_interval_mesh(0.0, 1.0, n, true), 1);
    std::vector<double> lam(b.space.n_dofs);
    Rng rng(3);
    for (double& v : lam)
        v = rng.uniform(0.5, 3.0);
    const std::vector<double> eps = first_order_viscosity(lam, b.geo);
    for (int i = 0; i < b.space.n_dofs; ++i)
        CHECK(oracle::rel_diff(eps[i] * h * h, 0.5 * h * lam[i]) < 1e-12);

    // 2D uniform: eps = lambda Phi / 2 (Phi plays the role of 1/h).
    SpaceBundle b2(make_rect_mesh(0.0, 1.0, 0.0, 1.0, 8, 8, true, true), 1);
    std::vector<double> lam2(b2.space.n_dofs, 1.7);
    const std::vector<double> eps2 = first_order_viscosity(lam2, b2.geo);
    for (int i = 0; i < b2.space.n_dofs; ++i)
        CHECK(oracle::rel_diff(eps2[i], 0.5 * 1.7 * b2.geo.indicator[i]) < 1e-12);
}

TEST_CASE("bdf weights") {
    CHECK(bdf_weights(0, 0.0, 0.0).levels == 0);
    CHECK(bdf_weights(0, 0.0, 0.0).w0 == 0.0);

    // BDF1 is the backward difference.
    BdfWeights w1 = bdf_weights(1, 0.25, 0.0);
    CHECK(w1.w0 == 4.0);
    CHECK(w1.w1 == -4.0);

    // Uniform-step BDF2 on u = t^2 at t=0.2 with tau=0.1: derivative 0.4.
    BdfWeights w2 = bdf_weights(2, 0.1, 0.1);
    const double d = w2.w0 * 0.04 + w2.w1 * 0.01 + w2.w2 * 0.0;
    CHECK(std::abs(d - 0.4) < 1e-13);

    // Variable steps: exact on quadratics.
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const double tau1 = rng.uniform(0.01, 0.5), tau2 = rng.uniform(0.01, 0.5);
        const double a = rng.uniform(-2, 2), bq = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
        const double t0 = rng.uniform(0.0, 1.0);
        auto u = [&](double tt) { return a * tt * tt + bq * tt + c; };
        BdfWeights w = bdf_weights(2, tau1, tau2);
        const double got = w.w0 * u(t0) + w.w1 * u(t0 - tau1) + w.w2 * u(t0 - tau1 - tau2);
        CHECK(std::abs(got - (2.0 * a * t0 + bq)) < 1e-10);
        // Weights annihilate constants.
        CHECK(std::abs(w.w0 + w.w1 + w.w2) < 1e-12 * std::abs(w.w0));
    }

    CHECK_THROWS(bdf_weights(1, 0.0, 0.0));
    CHECK_THROWS(bdf_weights(2, 0.1, -0.1));
}

TEST_CASE("residual smoother reproduces constants and matches a dense solve") {
    SpaceBundle b(make_rect_mesh(0.0, 1.0, 0.0, 1.0, 3, 3, false, false, 0.15, 7), 2);
    ResidualSmoother sm(b.space);
    const int nq = sm.rule().size();
    const int nc = b.mesh.n_cells();

    // Constant integrand c -> R = c (gradient term drops out).
    std::vector<double> one(static_cast<std::size_t>(nc) * nq, 0.7);
    for (double v : sm.project(one))
        CHECK(std::abs(v - 0.7) < 1e-10);

    // Random positive integrand vs dense oracle on the assembled system.
    Rng rng(21);
    std::vector<double> r(static_cast<std::size_t>(nc) * nq);
    for (double& v : r)
        v = rng.uniform(0.5, 2.0);
    const std::vector<double> R = sm.project(r);

    const CsrMatrix& A = sm.system();
    std::vector<double> dense(static_cast<std::size_t>(A.n_rows) * A.n_cols, 0.0);
    for (int i = 0; i < A.n_rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            dense[static_cast<std::size_t>(i) * A.n_cols + A.cols[k]] += A.vals[k];
    // Independent right-hand side assembly.
    const BasisTable& tab = b.space.table(default_quad_degree(2));
    std::vector<double> rhs(b.space.n_dofs, 0.0);
    for (int c = 0; c < nc; ++c)
        for (int q = 0; q < nq; ++q)
            for (int j = 0; j < b.space.n_loc; ++j)
                rhs[b.space.dofs(c)[j]] += tab.rule.weights[q] * b.space.det_jac[c] *
                                           r[static_cast<std::size_t>(c) * nq + q] * tab.val(q, j);
    const std::vector<double> Rd = oracle::dense_solve(dense, rhs);
    for (int i = 0; i < b.space.n_dofs; ++i)
        CHECK(std::abs(R[i] - Rd[i]) < 1e-9);
}

TEST_CASE("residual smoother concentrates at a 1d jump") {
    const int n = 20;
    SpaceBundle b(make_interval_mesh(0.0, 1.0, n), 1);
    ResidualSmoother sm(b.space);
    const int nq = sm.rule().size();

    // P1 interpolant of a step at x = 0.5, advected at speed 1: the residual
    // density is |q'|, nonzero only on the cell containing the jump.
    std::vector<double> q(b.space.n_dofs);
    for (int i = 0; i < b.space.n_dofs; ++i)
        q[i] = b.space.dof_pos[i].x < 0.5 ? 1.0 : 0.0;
    std::vector<double> integrand(static_cast<std::size_t>(b.mesh.n_cells()) * nq, 0.0);
    for (int c = 0; c < b.mesh.n_cells(); ++c) {
        const int* d = b.space.dofs(c);
        const double slope = (q[d[1]] - q[d[0]]) / b.mesh.cell_measure(c);
        for (int qq = 0; qq < nq; ++qq)
            integrand[std::size_t(c) * nq + qq] = std::abs(slope);
    }
    const std::vector<double> R = sm.project(integrand);

    int peak = 0;
    for (int i = 0; i < b.space.n_dofs; ++i)
        if (R[i] > R[peak])
            peak = i;
    CHECK(std::abs(b.space.dof_pos[peak].x - 0.5) < 1.5 / n);
    for (int i = 0; i < b.space.n_dofs; ++i)
        if (std::abs(b.space.dof_pos[i].x - 0.5) > 0.25)
            CHECK(R[i] < 0.05 * R[peak]);
}

TEST_CASE("mhd residual vanishes on constant states and sees the time derivative") {
    SpaceBundle b(make_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4, true, true), 1);
    ResidualSmoother sm(b.space);
    const int n = b.space.n_dofs;

    MhdField U(n);
    const MhdState s = conserved_state(1.0, {0.3, -0.2}, 0.8, {0.1, 0.2}, 5.0 / 3.0);
    for (int i = 0; i < n; ++i)
        U.set_state(i, s);

    MhdResidual R0 = mhd_residual(sm, b.space, U, nullptr, 5.0 / 3.0);
    for (int g = 0; g < 4; ++g)
        for (double v : R0.group(g))
            CHECK(std::abs(v) < 1e-12);

    // Constant d_tau: each component residual projects to itself; the groups
    // fold momentum and magnetic parts in Euclidean norm, scalars to |value|.
    MhdField dt(n);
    for (int i = 0; i < n; ++i) {
        dt.at(comp_rho, i) = 0.5;
        dt.at(comp_mx, i) = -0.3;
        dt.at(comp_my, i) = 0.4;
        dt.at(comp_energy, i) = -1.5;
        dt.at(comp_bx, i) = 0.0;
        dt.at(comp_by, i) = 0.2;
    }
    MhdResidual R1 = mhd_residual(sm, b.space, U, &dt, 5.0 / 3.0);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(R1.rho[i] - 0.5) < 1e-10);
        CHECK(std::abs(R1.energy[i] - 1.5) < 1e-10);
        CHECK(std::abs(R1.momentum[i] - 0.5) < 1e-10);
        CHECK(std::abs(R1.magnetic[i] - 0.2) < 1e-10);
    }
}

TEST_CASE("mhd residual matches a dense oracle on random data") {
    SpaceBundle b(make_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4, true, true), 1);
    ResidualSmoother sm(b.space);
    Rng rng(31);
    MhdField U = random_valid_field(b.space.n_dofs, rng);

    const MhdResidual R = mhd_residual(sm, b.space, U, nullptr, 5.0 / 3.0);

    // Re-assemble the right-hand sides independently and dense-solve.
    const BasisTable& tab = b.space.table(default_quad_degree(1));
    const int nq = tab.rule.size();
    const CsrMatrix& A = sm.system();
    std::vector<double> dense(static_cast<std::size_t>(A.n_rows) * A.n_cols, 0.0);
    for (int i = 0; i < A.n_rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            dense[static_cast<std::size_t>(i) * A.n_cols + A.cols[k]] += A.vals[k];

    std::array<std::vector<double>, n_comp> proj;
    for (int comp = 0; comp < n_comp; ++comp) {
        std::vector<double> rhs(b.space.n_dofs, 0.0);
        for (int c = 0; c < b.mesh.n_cells(); ++c) {
            const int* d = b.space.dofs(c);
            for (int q = 0; q < nq; ++q) {
                std::array<double, n_comp> val{};
                std::array<Vec2, n_comp> grad{};
                for (int j = 0; j < b.space.n_loc; ++j)
                    for (int cc = 0; cc < n_comp; ++cc) {
                        val[cc] += U.at(cc, d[j]) * tab.val(q, j);
                        grad[cc] += b.space.phys_grad(c, tab.grad(q, j)) * U.at(cc, d[j]);
                    }
                const auto div = flux_divergence(val, grad, 5.0 / 3.0);
                for (int j = 0; j < b.space.n_loc; ++j)
                    rhs[d[j]] +=
                        tab.rule.weights[q] * b.space.det_jac[c] * div[comp] * tab.val(q, j);
            }
        }
        proj[comp] = oracle::dense_solve(dense, rhs);
    }
    for (int i = 0; i < b.space.n_dofs; ++i) {
        CHECK(std::abs(R.rho[i] - std::abs(proj[comp_rho][i])) < 1e-9);
        CHECK(std::abs(R.energy[i] - std::abs(proj[comp_energy][i])) < 1e-9);
        CHECK(std::abs(R.momentum[i] - std::hypot(proj[comp_mx][i], proj[comp_my][i])) < 1e-9);
        CHECK(std::abs(R.magnetic[i] - std::hypot(proj[comp_bx][i], proj[comp_by][i])) < 1e-9);
    }
}

TEST_CASE("signed residual projection is high-order on smooth data") {
    // The nodal residual of an interpolated smooth solution has to converge
    // at the rate of the scheme, O(h^2) for P1. This only holds when the
    // signed density is projected: the per-cell gradient errors alternate in
    // sign and cancel in the node integrals.
    auto advection_error = [](int n) {
        SpaceBundle b(make_interval_mesh(0.0, 1.0, n, true), 1);
        ResidualSmoother sm(b.space);
        const double beta = 1.3;
        std::vector<double> q(b.space.n_dofs);
        for (int i = 0; i < b.space.n_dofs; ++i)
            q[i] = std::sin(2.0 * M_PI * b.space.dof_pos[i].x);
        const int nq = sm.rule().size();
        std::vector<double> integrand(static_cast<std::size_t>(b.mesh.n_cells()) * nq);
        for (int c = 0; c < b.mesh.n_cells(); ++c) {
            const int* d = b.space.dofs(c);
            const double slope = (q[d[1]] - q[d[0]]) / b.mesh.cell_measure(c);
            for (int qq = 0; qq < nq; ++qq)
                integrand[std::size_t(c) * nq + qq] = beta * slope;
        }
        const std::vector<double> R = sm.project(integrand);
        double err = 0.0;
        for (int i = 0; i < b.space.n_dofs; ++i) {
            const double exact = beta * 2.0 * M_PI * std::cos(2.0 * M_PI * b.space.dof_pos[i].x);
            err = std::max(err, std::abs(R[i] - exact));
        }
        return err;
    };
    const double e1 = advection_error(64);
    const double e2 = advection_error(128);
    const double rate_1d = std::log2(e1 / e2);
    CHECK(rate_1d > 1.6);
    CHECK(rate_1d < 2.6);

    // Full MHD residual with the nodal time derivative set to the exact
    // -div F: the group maxima must also vanish at second order.
    const double gamma = 5.0 / 3.0;
    const double base[n_comp] = {1.0, 0.3, -0.2, 4.0, 0.1, 0.15};
    const double amp[n_comp] = {0.05, 0.04, 0.03, 0.1, 0.03, 0.02};
    const double phx[n_comp] = {0.0, 0.7, 1.3, 0.4, 2.1, 0.9};
    const double phy[n_comp] = {0.5, 1.1, 0.2, 1.7, 0.8, 2.3};
    auto field_at = [&](Vec2 x, std::array<double, n_comp>& val,
                        std::array<Vec2, n_comp>& grad) {
        const double w = 2.0 * M_PI;
        for (int c = 0; c < n_comp; ++c) {
            const double sx = std::sin(w * x.x + phx[c]);
            const double cx = std::cos(w * x.x + phx[c]);
            const double sy = std::sin(w * x.y + phy[c]);
            const double cy = std::cos(w * x.y + phy[c]);
            val[c] = base[c] + amp[c] * sx * cy;
            grad[c] = {amp[c] * w * cx * cy, -amp[c] * w * sx * sy};
        }
    };
    auto mhd_error = [&](int n) {
        SpaceBundle b(make_rect_mesh(0.0, 1.0, 0.0, 1.0, n, n, true, true), 1);
        ResidualSmoother sm(b.space);
        MhdField U(b.space.n_dofs), dt(b.space.n_dofs);
        for (int i = 0; i < b.space.n_dofs; ++i) {
            std::array<double, n_comp> val;
            std::array<Vec2, n_comp> grad;
            field_at(b.space.dof_pos[i], val, grad);
            const auto div = flux_divergence(val, grad, gamma);
            for (int c = 0; c < n_comp; ++c) {
                U.at(c, i) = val[c];
                dt.at(c, i) = -div[c];
            }
        }
        const MhdResidual R = mhd_residual(sm, b.space, U, &dt, gamma);
        double err = 0.0;
        for (int g = 0; g < 4; ++g)
            for (double v : R.group(g))
                err = std::max(err, v);
        return err;
    };
    const double m1 = mhd_error(16);
    const double m2 = mhd_error(32);
    const double rate_2d = std::log2(m1 / m2);
    CHECK(rate_2d > 1.6);
    CHECK(rate_2d < 2.6);
}

TEST_CASE("normalization hand examples") {
    SpaceBundle b(make_interval_mesh(0.0, 1.0, 4), 1);
    PatchTable pt = dof_patches(b.space);
    const std::vector<double> lumped = lumped_mass(b.space);

    std::vector<double> x{0.0, 0.0, 1.0, 0.0, 0.0};
    const std::vector<double> psi = normalization(x, pt, lumped, b.mesh.domain_measure());
    // Mass-weighted mean: 0.25 * 1 / 1 = 0.25; global deviation 0.75.
    // Peak node: patch range = global range -> theta = 1 -> safety term only.
    CHECK(std::abs(psi[2] - 1e-8) < 1e-22);
    // End node: flat patch -> theta = 0 -> 0.75/4 + 1e-8.
    CHECK(std::abs(psi[0] - (0.1875 + 1e-8)) < 1e-15);

    // Globally constant field: flat convention, safety term only.
    std::vector<double> c(5, -3.0);
    for (double v : normalization(c, pt, lumped, 1.0))
        CHECK(std::abs(v - 3e-8) < 1e-22);
}

TEST_CASE("residual viscosity: zero residual, saturation, and cap") {
    SpaceBundle b(make_rect_mesh(0.0, 1.0, 0.0, 1.0, 5, 5, true, true, 0.2, 11), 1);
    const int n = b.space.n_dofs;
    Rng rng(41);

    std::vector<double> lam(n);
    for (double& v : lam)
        v = rng.uniform(0.5, 4.0);
    const std::vector<double> epsL = first_order_viscosity(lam, b.geo);

    std::array<std::vector<double>, 4> psi;
    for (auto& p : psi) {
        p.resize(n);
        for (double& v : p)
            v = rng.uniform(1e-6, 1.0);
    }

    MhdResidual R;
    R.rho.assign(n, 0.0);
    R.energy.assign(n, 0.0);
    R.momentum.assign(n, 0.0);
    R.magnetic.assign(n, 0.0);
    for (double v : residual_viscosity(R, psi, lam, b.geo))
        CHECK(v == 0.0);

    // Huge residual saturates the cap bitwise.
    R.rho.assign(n, 1e12);
    const std::vector<double> sat = residual_viscosity(R, psi, lam, b.geo);
    for (int i = 0; i < n; ++i)
        CHECK(sat[i] == epsL[i]);

    // Random residuals never exceed the cap.
    for (int trial = 0; trial < 50; ++trial) {
        for (auto* grp : {&R.rho, &R.energy, &R.momentum, &R.magnetic})
            for (double& v : *grp)
                v = rng.uniform(0.0, 10.0);
        const std::vector<double> eps = residual_viscosity(R, psi, lam, b.geo);
        for (int i = 0; i < n; ++i) {
            CHECK(eps[i] <= epsL[i]);
            CHECK(eps[i] >= 0.0);
        }
    }

    // Zero Psi under positive residual saturates rather than dividing by zero.
    for (auto& p : psi)
        p.assign(n, 0.0);
    R.rho.assign(n, 1e-30);
    const std::vector<double> guard = residual_viscosity(R, psi, lam, b.geo);
    for (int i = 0; i < n; ++i)
        CHECK(guard[i] == epsL[i]);
}

TEST_CASE("smooth-data residual scaling matches the first-order bound") {
    // 1D periodic advection q_t + beta q_x = 0 with frozen time derivative:
    // signed residual density beta q'. For smooth data the normalized nodal
    // residual stays below 4 beta Phi / (1 - theta) wherever theta < 1.
    const int n = 40;
    const double beta = 1.3;
    SpaceBundle b(make_interval_mesh(0.0, 1.0, n, true), 1);
    ResidualSmoother sm(b.space);
    PatchTable pt = dof_patches(b.space);
    const std::vector<double> lumped = lumped_mass(b.space);
    Rng rng(53);

    for (int trial = 0; trial < 20; ++trial) {
        const double amp = rng.uniform(0.2, 2.0);
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const double shift = rng.uniform(-1.0, 1.0);
        std::vector<double> q(b.space.n_dofs);
        for (int i = 0; i < b.space.n_dofs; ++i)
            q[i] = shift + amp * std::sin(2.0 * M_PI * b.space.dof_pos[i].x + phase);

        const int nq = sm.rule().size();
        std::vector<double> integrand(static_cast<std::size_t>(b.mesh.n_cells()) * nq);
        for (int c = 0; c < b.mesh.n_cells(); ++c) {
            const int* d = b.space.dofs(c);
            const double slope = (q[d[1]] - q[d[0]]) / b.mesh.cell_measure(c);
            for (int qq = 0; qq < nq; ++qq)
                integrand[std::size_t(c) * nq + qq] = beta * slope;
        }
        std::vector<double> R = sm.project(integrand);
        for (double& v : R)
            v = std::abs(v);
        const std::vector<double> psi = normalization(q, pt, lumped, b.mesh.domain_measure());

        double qmin = q[0], qmax = q[0];
        for (double v : q) {
            qmin = std::min(qmin, v);
            qmax = std::max(qmax, v);
        }
        for (int i = 0; i < b.space.n_dofs; ++i) {
            double lo = q[i], hi = q[i];
            for (int j : pt.node_nodes[i]) {
                lo = std::min(lo, q[j]);
                hi = std::max(hi, q[j]);
            }
            const double theta = (hi - lo) / (qmax - qmin);
            if (theta > 0.9)
                continue;
            CHECK(R[i] / psi[i] <=
                  4.0 * beta * b.geo.indicator[i] / (1.0 - theta) * (1.0 + 1e-9));
        }
    }
}
