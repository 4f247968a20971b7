#include "mhdnv/viscosity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mhdnv {

std::vector<double> first_order_viscosity(const std::vector<double>& lambda_max,
                                          const NodalGeometry& geo) {
    const int n = static_cast<int>(lambda_max.size());
    std::vector<double> eps(n);
    // Same product order as residual_viscosity, so the cap eps^RV <= eps^L
    // survives rounding (multiplying a <= b by positive factors is monotone).
    for (int i = 0; i < n; ++i) {
        const double cap = lambda_max[i] * geo.indicator[i];
        eps[i] = geo.constant[i] * cap * geo.lumped_fine[i];
    }
    return eps;
}

BdfWeights bdf_weights(int levels, double tau1, double tau2) {
    BdfWeights w;
    if (levels <= 0)
        return w;
    if (!(tau1 > 0.0))
        throw std::invalid_argument("bdf_weights: non-positive step");
    if (levels == 1) {
        w.levels = 1;
        w.w0 = 1.0 / tau1;
        w.w1 = -1.0 / tau1;
        return w;
    }
    if (!(tau2 > 0.0))
        throw std::invalid_argument("bdf_weights: non-positive step");
    w.levels = 2;
    w.w0 = (2.0 * tau1 + tau2) / (tau1 * (tau1 + tau2));
    w.w1 = -(tau1 + tau2) / (tau1 * tau2);
    w.w2 = tau1 / (tau2 * (tau1 + tau2));
    return w;
}

ResidualSmoother::ResidualSmoother(const LagrangeSpace& space)
    : space_(&space), table_(&space.table(default_quad_degree(space.degree))) {
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = *table_;
    const int nq = tab.rule.size();
    const int nl = space.n_loc;

    CsrBuilder bld(space.n_dofs, space.n_dofs);
    std::vector<Vec2> pg(nl);
    std::vector<double> local(static_cast<std::size_t>(nl) * nl);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double coef =
            std::pow(mesh.cell_measure(c), 2.0 / space.dim) / space.degree;
        std::fill(local.begin(), local.end(), 0.0);
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space.det_jac[c];
            for (int j = 0; j < nl; ++j)
                pg[j] = space.phys_grad(c, tab.grad(q, j));
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j < nl; ++j)
                    local[std::size_t(i) * nl + j] +=
                        w * (tab.val(q, i) * tab.val(q, j) + coef * dot(pg[i], pg[j]));
        }
        const int* d = space.dofs(c);
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                bld.add(d[i], d[j], local[std::size_t(i) * nl + j]);
    }
    system_ = bld.compress();
    diag_ = system_.diagonal();
}

std::vector<double> ResidualSmoother::project(const std::vector<double>& integrand) const {
    const LagrangeSpace& space = *space_;
    const BasisTable& tab = *table_;
    const int nq = tab.rule.size();
    if (integrand.size() != static_cast<std::size_t>(space.mesh->n_cells()) * nq)
        throw std::invalid_argument("residual projection: integrand size mismatch");

    std::vector<double> rhs(space.n_dofs, 0.0);
    for (int c = 0; c < space.mesh->n_cells(); ++c) {
        const int* d = space.dofs(c);
        for (int q = 0; q < nq; ++q) {
            const double w =
                tab.rule.weights[q] * space.det_jac[c] * integrand[std::size_t(c) * nq + q];
            for (int j = 0; j < space.n_loc; ++j)
                rhs[d[j]] += w * tab.val(q, j);
        }
    }

    std::vector<double> R(space.n_dofs, 0.0);
    CgOptions opt;
    opt.rel_tol = 1e-12;
    const CgResult r = cg_solve(system_, rhs, diag_, R, opt);
    if (!r.converged)
        throw std::runtime_error("residual projection: smoothing solve failed");
    return R;
}

MhdResidual mhd_residual(const ResidualSmoother& smoother, const LagrangeSpace& space,
                         const MhdField& u, const MhdField* d_tau, double gamma) {
    const BasisTable& tab = space.table(default_quad_degree(space.degree));
    const int nq = tab.rule.size();
    const int nl = space.n_loc;
    const int nc = space.mesh->n_cells();

    std::array<std::vector<double>, n_comp> integrand;
    for (auto& v : integrand)
        v.assign(static_cast<std::size_t>(nc) * nq, 0.0);

    std::vector<Vec2> pg(nl);
    for (int c = 0; c < nc; ++c) {
        const int* d = space.dofs(c);
        for (int q = 0; q < nq; ++q) {
            for (int j = 0; j < nl; ++j)
                pg[j] = space.phys_grad(c, tab.grad(q, j));
            std::array<double, n_comp> val{};
            std::array<Vec2, n_comp> grad{};
            std::array<double, n_comp> dt{};
            for (int j = 0; j < nl; ++j) {
                const double phi = tab.val(q, j);
                for (int comp = 0; comp < n_comp; ++comp) {
                    const double uj = u.at(comp, d[j]);
                    val[comp] += uj * phi;
                    grad[comp] += pg[j] * uj;
                    if (d_tau)
                        dt[comp] += d_tau->at(comp, d[j]) * phi;
                }
            }
            std::array<double, n_comp> div;
            try {
                div = flux_divergence(val, grad, gamma);
            } catch (const std::exception&) {
                throw std::runtime_error("residual: invalid state in cell " + std::to_string(c));
            }
            for (int comp = 0; comp < n_comp; ++comp)
                integrand[comp][std::size_t(c) * nq + q] = dt[comp] + div[comp];
        }
    }

    std::array<std::vector<double>, n_comp> proj;
    for (int comp = 0; comp < n_comp; ++comp)
        proj[comp] = smoother.project(integrand[comp]);

    MhdResidual out;
    out.rho = std::move(proj[comp_rho]);
    out.energy = std::move(proj[comp_energy]);
    out.momentum.resize(u.n);
    out.magnetic.resize(u.n);
    for (int i = 0; i < u.n; ++i) {
        out.rho[i] = std::abs(out.rho[i]);
        out.energy[i] = std::abs(out.energy[i]);
        out.momentum[i] = std::hypot(proj[comp_mx][i], proj[comp_my][i]);
        out.magnetic[i] = std::hypot(proj[comp_bx][i], proj[comp_by][i]);
    }
    return out;
}

std::vector<double> normalization(const std::vector<double>& x, const PatchTable& patches,
                                  const std::vector<double>& lumped, double domain_measure) {
    const int n = static_cast<int>(x.size());
    if (n < 2)
        throw std::invalid_argument("normalization: need at least two nodes");

    double xbar = 0.0;
    for (int i = 0; i < n; ++i)
        xbar += lumped[i] * x[i];
    xbar /= domain_measure;

    double xinf = 0.0, dev = 0.0;
    double xmin = x[0], xmax = x[0];
    for (int i = 0; i < n; ++i) {
        xinf = std::max(xinf, std::abs(x[i]));
        dev = std::max(dev, std::abs(x[i] - xbar));
        xmin = std::min(xmin, x[i]);
        xmax = std::max(xmax, x[i]);
    }
    const double range = xmax - xmin;
    const bool flat = !(range > 1e-14 * xinf);

    std::vector<double> psi(n);
    for (int i = 0; i < n; ++i) {
        double theta = 0.0;
        if (!flat) {
            double lo = x[i], hi = x[i];
            for (int j : patches.node_nodes[i]) {
                lo = std::min(lo, x[j]);
                hi = std::max(hi, x[j]);
            }
            theta = (hi - lo) / range;
        }
        psi[i] = 0.25 * dev * (1.0 - theta) + 1e-8 * xinf;
    }
    return psi;
}

std::array<std::vector<double>, 4> residual_groups(const MhdField& u) {
    std::array<std::vector<double>, 4> g;
    for (auto& v : g)
        v.resize(u.n);
    for (int i = 0; i < u.n; ++i) {
        g[0][i] = u.at(comp_rho, i);
        g[1][i] = u.at(comp_energy, i);
        g[2][i] = std::hypot(u.at(comp_mx, i), u.at(comp_my, i));
        g[3][i] = std::hypot(u.at(comp_bx, i), u.at(comp_by, i));
    }
    return g;
}

std::vector<double> residual_viscosity(const MhdResidual& R,
                                       const std::array<std::vector<double>, 4>& psi,
                                       const std::vector<double>& lambda_max,
                                       const NodalGeometry& geo) {
    const int n = static_cast<int>(lambda_max.size());
    std::vector<double> eps(n);
    for (int i = 0; i < n; ++i) {
        double scaled = 0.0;
        for (int g = 0; g < 4; ++g) {
            const double r = R.group(g)[i];
            if (r <= 0.0)
                continue;
            const double p = psi[g][i];
            scaled = std::max(scaled, p > 0.0 ? r / p : std::numeric_limits<double>::infinity());
        }
        const double cap = lambda_max[i] * geo.indicator[i];
        eps[i] = geo.constant[i] * std::min(cap, scaled) * geo.lumped_fine[i];
    }
    return eps;
}

} // namespace mhdnv
