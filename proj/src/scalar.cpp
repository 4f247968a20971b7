#include "mhdnv/scalar.hpp"

#include "mhdnv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mhdnv {

namespace {

void require_p1(const LagrangeSpace& space, const char* who) {
    if (space.degree != 1)
        throw std::invalid_argument(std::string(who) + ": P1 space required");
}

// Physical P1 vertex gradients of one cell.
void cell_gradients(const Triangulation& mesh, int c, Vec2 g[3]) {
    const int* v = mesh.cell(c);
    if (mesh.dim == 1) {
        const double len = mesh.vertices[v[1]].x - mesh.vertices[v[0]].x;
        g[0] = {-1.0 / len, 0.0};
        g[1] = {1.0 / len, 0.0};
        g[2] = {0.0, 0.0};
        return;
    }
    Mat2 A;
    const Vec2 e1 = mesh.vertices[v[1]] - mesh.vertices[v[0]];
    const Vec2 e2 = mesh.vertices[v[2]] - mesh.vertices[v[0]];
    A.m[0][0] = e1.x; A.m[0][1] = e2.x;
    A.m[1][0] = e1.y; A.m[1][1] = e2.y;
    const Mat2 invT = A.inverse().transposed();
    g[0] = invT.apply({-1.0, -1.0});
    g[1] = invT.apply({1.0, 0.0});
    g[2] = invT.apply({0.0, 1.0});
}

} // namespace

std::vector<double> scalar_first_order_viscosity(const std::vector<double>& q,
                                                 const ScalarProblem& pr,
                                                 const LagrangeSpace& space,
                                                 const NodalGeometry& geo,
                                                 const PatchTable& patches) {
    require_p1(space, "scalar_first_order_viscosity");
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(3);
    const int nq = tab.rule.size();
    const int nl = space.n_loc;

    // |f'| at the quadrature points of each cell; nodal samples come in
    // through the patch loop below
    std::vector<double> cell_sup(mesh.n_cells(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        const int* v = mesh.cell(c);
        double sup = 0.0;
        for (int qp = 0; qp < nq; ++qp) {
            double val = 0.0;
            Vec2 x{0.0, 0.0};
            for (int j = 0; j < nl; ++j) {
                val += tab.val(qp, j) * q[d[j]];
                x += mesh.vertices[v[j]] * tab.val(qp, j);
            }
            sup = std::max(sup, norm(pr.fprime(x, val)));
        }
        cell_sup[c] = sup;
    }

    std::vector<double> eps(space.n_dofs);
    for (int i = 0; i < space.n_dofs; ++i) {
        double sup = 0.0;
        for (int j : patches.node_nodes[i])
            sup = std::max(sup, norm(pr.fprime(space.dof_pos[j], q[j])));
        for (int c : patches.node_cells[i])
            sup = std::max(sup, cell_sup[c]);
        // same product order as the field solver's cap
        eps[i] = geo.constant[i] * (sup * geo.indicator[i]) * geo.lumped_fine[i];
    }
    return eps;
}

std::vector<double> scalar_frozen_step(const std::vector<double>& w,
                                       const std::vector<double>& q_frozen,
                                       const std::vector<double>& eps, double tau,
                                       const ScalarProblem& pr, const LagrangeSpace& space,
                                       const NodalGeometry& geo) {
    require_p1(space, "scalar_frozen_step");
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(3);
    const int nq = tab.rule.size();
    const int nl = space.n_loc;

    std::vector<double> rhs(space.n_dofs, 0.0);
    Vec2 g[3];
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        const int* v = mesh.cell(c);
        cell_gradients(mesh, c, g);
        Vec2 gw{0.0, 0.0};
        for (int j = 0; j < nl; ++j)
            gw += g[j] * w[d[j]];

        // transport (f'(q_frozen) . grad w, phi_i), degree-3 quadrature
        for (int qp = 0; qp < nq; ++qp) {
            double qf = 0.0;
            Vec2 x{0.0, 0.0};
            for (int j = 0; j < nl; ++j) {
                qf += tab.val(qp, j) * q_frozen[d[j]];
                x += mesh.vertices[v[j]] * tab.val(qp, j);
            }
            const double flow =
                dot(pr.fprime(x, qf), gw) * tab.rule.weights[qp] * space.det_jac[c];
            for (int i = 0; i < nl; ++i)
                rhs[d[i]] += flow * tab.val(qp, i);
        }

        // viscosity through the nodal-average identity: eps_h is linear and
        // the metric gradient product is constant, so this is exact
        const std::array<double, 9> st = p1_stencil_matrix(mesh, c);
        double ebar = 0.0;
        for (int j = 0; j < nl; ++j)
            ebar += eps[d[j]];
        ebar /= nl;
        for (int i = 0; i < nl; ++i) {
            double acc = 0.0;
            for (int j = 0; j < nl; ++j)
                acc += st[std::size_t(i) * 3 + j] * w[d[j]];
            rhs[d[i]] += ebar * acc;
        }
    }

    std::vector<double> out(space.n_dofs);
    for (int i = 0; i < space.n_dofs; ++i)
        out[i] = w[i] - tau / geo.lumped[i] * rhs[i];
    return out;
}

std::vector<double> scalar_euler_step(const std::vector<double>& q,
                                      const std::vector<double>& eps, double tau,
                                      const ScalarProblem& pr, const LagrangeSpace& space,
                                      const NodalGeometry& geo) {
    return scalar_frozen_step(q, q, eps, tau, pr, space, geo);
}

ScalarCfl scalar_cfl(const NodalGeometry& geo, int dim, double beta, double kappa) {
    ScalarCfl r;
    r.cfl = 1.0 / ((1.0 + dim * kappa) * kappa);
    double gmax = 0.0;
    for (double p : geo.indicator)
        gmax = std::max(gmax, p);
    r.tau_max = beta > 0.0 ? r.cfl / (beta * gmax) : std::numeric_limits<double>::infinity();
    return r;
}

DmpReport dmp_check(const std::vector<double>& q0, const std::vector<double>& q1,
                    const PatchTable& patches) {
    const auto [lo, hi] = std::minmax_element(q0.begin(), q0.end());
    const double tol = 1e-12 * (*hi - *lo);
    DmpReport rep;
    for (int i = 0; i < patches.n_nodes(); ++i) {
        double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
        for (int j : patches.node_nodes[i]) {
            pmin = std::min(pmin, q0[j]);
            pmax = std::max(pmax, q0[j]);
        }
        if (q1[i] < pmin - tol || q1[i] > pmax + tol)
            rep.violators.push_back(i);
    }
    return rep;
}

TrapezoidSides trapezoid_identity_check(const Triangulation& mesh, int cell,
                                        const std::array<double, 3>& eps_nodes, int i_loc,
                                        int j_loc) {
    const int npc = mesh.dim + 1;
    TrapezoidSides out;

    const std::array<double, 9> st = p1_stencil_matrix(mesh, cell);
    double ebar = 0.0;
    for (int l = 0; l < npc; ++l)
        ebar += eps_nodes[l];
    ebar /= npc;
    out.closed_form = ebar * st[std::size_t(i_loc) * 3 + j_loc];

    // quadrature side: (J^T grad phi_j).(J^T grad phi_i) is constant on the
    // cell, eps_h linear, so a degree-2 rule is already exact
    Vec2 g[3];
    cell_gradients(mesh, cell, g);
    const Mat2 J = equilateral_jacobian(mesh, cell);
    const Mat2 metric = J.mul(J.transposed());
    const double gprod = dot(metric.apply(g[j_loc]), g[i_loc]);
    const QuadratureRule rule = simplex_quadrature(mesh.dim, 2);
    const ReferenceBasis p1 = reference_basis(mesh.dim, 1);
    const double measure = mesh.cell_measure(cell);
    const double ref_measure = mesh.dim == 1 ? 1.0 : 0.5;
    double integral = 0.0;
    std::array<double, 3> phi{};
    for (int qp = 0; qp < rule.size(); ++qp) {
        p1.eval(rule.points[qp], phi.data());
        double e = 0.0;
        for (int l = 0; l < npc; ++l)
            e += phi[l] * eps_nodes[l];
        integral += e * rule.weights[qp] * (measure / ref_measure);
    }
    out.quadrature = gprod * integral;
    return out;
}

} // namespace mhdnv
