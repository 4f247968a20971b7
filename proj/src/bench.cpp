#include "mhdnv/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mhdnv {

namespace {

constexpr double pi = std::numbers::pi;

// Per-position uniform draw: coordinate bits and the salt feed the seed of a
// throwaway generator. Same (x, seed, salt) always gives the same value, on
// any mesh that places a node there.
double noise_at(Vec2 x, uint64_t seed, uint64_t salt, double amp) {
    uint64_t h = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    const auto mix = [&h](uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 29;
    };
    mix(std::bit_cast<uint64_t>(x.x));
    mix(std::bit_cast<uint64_t>(x.y));
    Rng r(h);
    return r.uniform(-amp, amp);
}

MhdState vortex_state(Vec2 x, double t) {
    const double mu = 1.0, gamma = 5.0 / 3.0;
    const Vec2 r{x.x - t, x.y - t}; // center advected by the (1,1) background
    const double r2 = dot(r, r);
    const double bump = std::exp(0.5 * (1.0 - r2));
    const Vec2 swirl{-r.y, r.x};
    const Vec2 u = Vec2{1.0, 1.0} + swirl * (mu / (pi * std::sqrt(2.0)) * bump);
    const double p = 1.0 - mu * mu * (1.0 + r2) * std::exp(1.0 - r2) / (8.0 * pi * pi);
    const Vec2 B = Vec2{0.1, 0.1} + swirl * (mu / (2.0 * pi) * bump);
    return conserved_state(1.0, u, p, B, gamma);
}

} // namespace

std::map<std::string, ProblemSpec> registry(double blast_radius, double kh_bx) {
    std::map<std::string, ProblemSpec> reg;

    {
        ProblemSpec pr;
        pr.name = "vortex";
        pr.x0 = -10.0, pr.x1 = 10.0, pr.y0 = -10.0, pr.y1 = 10.0;
        pr.gamma = 5.0 / 3.0;
        pr.periodic_x = pr.periodic_y = true;
        pr.cfl = 0.1;
        pr.t_final = 0.05;
        pr.initial = [](Vec2 x, uint64_t) { return vortex_state(x, 0.0); };
        pr.exact = vortex_state;
        pr.notes = "smooth moving vortex; the perturbation decays like exp(-r^2/2), so the "
                   "periodic wrap is negligible";
        reg[pr.name] = pr;
    }

    {
        ProblemSpec pr;
        pr.name = "brio-wu";
        pr.x0 = 0.0, pr.x1 = 1.0, pr.y0 = 0.0, pr.y1 = 1.0; // strip height set by the mesh
        pr.gamma = 2.0;
        pr.periodic_y = true;
        pr.pseudo_1d = true;
        pr.cfl = 0.3;
        pr.t_final = 0.1;
        pr.initial = [](Vec2 x, uint64_t) {
            return x.x < 0.5 ? conserved_state(1.0, {0.0, 0.0}, 1.0, {0.75, 1.0}, 2.0)
                             : conserved_state(0.125, {0.0, 0.0}, 0.1, {0.75, -1.0}, 2.0);
        };
        pr.bc = {{tag_left, BcKind::dirichlet}, {tag_right, BcKind::dirichlet}};
        pr.notes = "shock tube on a one-element-high periodic strip";
        reg[pr.name] = pr;
    }

    {
        ProblemSpec pr;
        pr.name = "orszag-tang";
        pr.gamma = 5.0 / 3.0;
        pr.periodic_x = pr.periodic_y = true;
        pr.cfl = 0.3;
        pr.t_final = 1.0;
        pr.initial = [](Vec2 x, uint64_t) {
            const double rho = 25.0 / (36.0 * pi);
            const Vec2 u{-std::sin(2.0 * pi * x.y), std::sin(2.0 * pi * x.x)};
            const double p = 5.0 / (12.0 * pi);
            const Vec2 B = Vec2{-std::sin(2.0 * pi * x.y), std::sin(4.0 * pi * x.x)} *
                           (1.0 / std::sqrt(4.0 * pi));
            return conserved_state(rho, u, p, B, 5.0 / 3.0);
        };
        pr.notes = "vortex system developing shocks; field snapshots of interest at t = 0.5 "
                   "and t = 1";
        reg[pr.name] = pr;
    }

    {
        ProblemSpec pr;
        pr.name = "kelvin-helmholtz";
        pr.x0 = -0.5, pr.x1 = 0.5, pr.y0 = -0.5, pr.y1 = 0.5;
        pr.gamma = 5.0 / 3.0;
        pr.periodic_x = pr.periodic_y = true;
        pr.cfl = 0.4;
        pr.t_final = 6.0;
        pr.initial = [kh_bx](Vec2 x, uint64_t seed) {
            const bool inner = std::abs(x.y) <= 0.25;
            Vec2 u{inner ? 0.5 : -0.5, 0.0};
            u.x += noise_at(x, seed, 1, 0.005);
            u.y += noise_at(x, seed, 2, 0.005);
            return conserved_state(inner ? 2.0 : 1.0, u, 2.5, {kh_bx, 0.0}, 5.0 / 3.0);
        };
        pr.notes = "shear layers with seeded velocity noise; horizontal field strength "
                   "configurable (0 or 0.2)";
        reg[pr.name] = pr;
    }

    {
        ProblemSpec pr;
        pr.name = "blast";
        pr.x0 = -0.5, pr.x1 = 0.5, pr.y0 = -0.5, pr.y1 = 0.5;
        pr.gamma = 1.4;
        pr.periodic_x = pr.periodic_y = true;
        pr.cfl = 0.2;
        pr.t_final = 0.01;
        pr.initial = [blast_radius](Vec2 x, uint64_t) {
            const double p = dot(x, x) <= blast_radius * blast_radius ? 1000.0 : 0.1;
            return conserved_state(1.0, {0.0, 0.0}, p, {100.0 / std::sqrt(4.0 * pi), 0.0},
                                   1.4);
        };
        pr.notes = "strongly magnetized blast; the radius is configurable (a radius of 1 "
                   "would cover the whole domain, the default 0.1 matches the common setup)";
        reg[pr.name] = pr;
    }

    return reg;
}

Triangulation problem_mesh(const ProblemSpec& pr, int nx, int ny, double perturb,
                           uint64_t mesh_seed) {
    if (pr.pseudo_1d) {
        const double h = (pr.x1 - pr.x0) / nx;
        return make_rect_mesh(pr.x0, pr.x1, 0.0, h, nx, 1, pr.periodic_x, true, perturb,
                              mesh_seed);
    }
    if (ny <= 0) {
        const double aspect = (pr.y1 - pr.y0) / (pr.x1 - pr.x0);
        ny = std::max(1, int(std::lround(nx * aspect)));
    }
    return make_rect_mesh(pr.x0, pr.x1, pr.y0, pr.y1, nx, ny, pr.periodic_x, pr.periodic_y,
                          perturb, mesh_seed);
}

MhdBcs problem_bcs(const ProblemSpec& pr, uint64_t seed) {
    MhdBcs bcs;
    bcs.kind = pr.bc;
    if (pr.initial)
        bcs.dirichlet = [init = pr.initial, seed](Vec2 x) { return init(x, seed); };
    return bcs;
}

const ErrorRow& ErrorReport::row(const std::string& var) const {
    for (const ErrorRow& r : rows)
        if (r.var == var)
            return r;
    throw std::out_of_range("ErrorReport: no variable " + var);
}

ErrorReport error_norms(const MhdField& u, const std::function<MhdState(Vec2)>& exact,
                        const LagrangeSpace& space, double gamma) {
    if (!exact)
        throw std::invalid_argument("error_norms: exact solution required");
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(2 * space.degree + 4);
    const int nq = tab.rule.size();
    const int nl = space.n_loc;

    constexpr int nv = 5;
    static const char* names[nv] = {"rho", "u", "p", "B", "E"};
    double l1[nv]{}, l2[nv]{}, linf[nv]{}, d1[nv]{}, d2[nv]{}, dinf[nv]{};

    const auto sample = [gamma](const MhdState& h, const MhdState& e, double* err,
                                double* den) {
        err[0] = std::abs(h.rho - e.rho), den[0] = std::abs(e.rho);
        err[1] = norm(h.m * (1.0 / h.rho) - e.m * (1.0 / e.rho));
        den[1] = norm(e.m * (1.0 / e.rho));
        err[2] = std::abs(pressure(h, gamma) - pressure(e, gamma));
        den[2] = std::abs(pressure(e, gamma));
        err[3] = norm(h.B - e.B), den[3] = norm(e.B);
        err[4] = std::abs(h.E - e.E), den[4] = std::abs(e.E);
    };

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        const int* v = mesh.cell(c);
        const Vec2 p0 = mesh.vertices[v[0]];
        const Vec2 e1 = mesh.vertices[v[1]] - p0;
        const Vec2 e2 = mesh.dim == 2 ? mesh.vertices[v[2]] - p0 : Vec2{0.0, 0.0};
        for (int qp = 0; qp < nq; ++qp) {
            double val[n_comp]{};
            for (int j = 0; j < nl; ++j)
                for (int cc = 0; cc < n_comp; ++cc)
                    val[cc] += tab.val(qp, j) * u.at(cc, d[j]);
            const MhdState h{val[0], {val[1], val[2]}, val[3], {val[4], val[5]}};
            const Vec2 xq = p0 + e1 * tab.rule.points[qp].x + e2 * tab.rule.points[qp].y;
            const MhdState ex = exact(xq);
            double err[nv], den[nv];
            sample(h, ex, err, den);
            const double w = tab.rule.weights[qp] * space.det_jac[c];
            for (int k = 0; k < nv; ++k) {
                l1[k] += w * err[k];
                l2[k] += w * err[k] * err[k];
                linf[k] = std::max(linf[k], err[k]);
                d1[k] += w * den[k];
                d2[k] += w * den[k] * den[k];
                dinf[k] = std::max(dinf[k], den[k]);
            }
        }
    }

    // Linf also sampled at the nodes themselves.
    for (int i = 0; i < space.n_dofs; ++i) {
        double err[nv], den[nv];
        sample(u.state(i), exact(space.dof_pos[i]), err, den);
        for (int k = 0; k < nv; ++k) {
            linf[k] = std::max(linf[k], err[k]);
            dinf[k] = std::max(dinf[k], den[k]);
        }
    }

    ErrorReport rep;
    rep.dofs = space.n_dofs;
    for (int k = 0; k < nv; ++k) {
        ErrorRow row;
        row.var = names[k];
        row.l1 = d1[k] > 0.0 ? l1[k] / d1[k] : l1[k];
        row.l2 = d2[k] > 0.0 ? std::sqrt(l2[k]) / std::sqrt(d2[k]) : std::sqrt(l2[k]);
        row.linf = dinf[k] > 0.0 ? linf[k] / dinf[k] : linf[k];
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<ConvergenceRow> convergence_rows(const std::vector<ErrorReport>& reports,
                                             int dim) {
    std::vector<ConvergenceRow> out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const ErrorReport& rep = reports[k];
        for (const ErrorRow& row : rep.rows) {
            const double errs[3] = {row.l1, row.l2, row.linf};
            const char* norms[3] = {"l1", "l2", "linf"};
            for (int n = 0; n < 3; ++n) {
                ConvergenceRow cr;
                cr.dofs = rep.dofs;
                cr.var = row.var;
                cr.norm = norms[n];
                cr.error = errs[n];
                cr.rate = nan;
                if (k > 0) {
                    const ErrorRow& prow = reports[k - 1].row(row.var);
                    const double perr[3] = {prow.l1, prow.l2, prow.linf};
                    // h scales like dofs^(-1/dim)
                    cr.rate = dim * std::log(perr[n] / cr.error) /
                              std::log(double(rep.dofs) / reports[k - 1].dofs);
                }
                out.push_back(cr);
            }
        }
    }
    return out;
}

std::vector<double> schlieren(const std::vector<double>& rho, const LagrangeSpace& space,
                              const NodalGeometry& geo, double zeta) {
    if (space.dim != 2)
        throw std::invalid_argument("schlieren: 2D meshes only");
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(2 * space.degree);
    const int nq = tab.rule.size();
    const int nl = space.n_loc;

    std::vector<Vec2> grad(space.n_dofs, Vec2{0.0, 0.0});
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        for (int qp = 0; qp < nq; ++qp) {
            Vec2 g{0.0, 0.0};
            for (int j = 0; j < nl; ++j)
                g += space.phys_grad(c, tab.grad(qp, j)) * rho[d[j]];
            const double w = tab.rule.weights[qp] * space.det_jac[c];
            for (int i = 0; i < nl; ++i)
                grad[d[i]] += g * (w * tab.val(qp, i));
        }
    }

    std::vector<double> mag(space.n_dofs);
    double gmax = 0.0;
    for (int i = 0; i < space.n_dofs; ++i) {
        mag[i] = norm(grad[i]) / geo.lumped[i];
        gmax = std::max(gmax, mag[i]);
    }
    std::vector<double> sigma(space.n_dofs, 1.0);
    if (gmax == 0.0)
        return sigma;
    for (int i = 0; i < space.n_dofs; ++i)
        sigma[i] = std::exp(-zeta * mag[i] / gmax);
    return sigma;
}

} // namespace mhdnv
