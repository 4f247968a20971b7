#include "mhdnv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace mhdnv {

ButcherTableau rk4_classic() {
    ButcherTableau t;
    t.stages = 4;
    t.a.assign(16, 0.0);
    t.a[4] = 0.5;  // a(1,0)
    t.a[9] = 0.5;  // a(2,1)
    t.a[14] = 1.0; // a(3,2)
    t.b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    t.c = {0.0, 0.5, 0.5, 1.0};
    return t;
}

namespace {

CsrMatrix stiffness_matrix(const LagrangeSpace& space) {
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(2 * space.degree);
    const int nq = int(tab.rule.points.size());
    const int nl = space.n_loc;

    CsrBuilder builder(space.n_dofs, space.n_dofs);
    std::vector<Vec2> pg(nl);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space.det_jac[c];
            for (int j = 0; j < nl; ++j)
                pg[j] = space.phys_grad(c, tab.grad(q, j));
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j < nl; ++j)
                    builder.add(d[i], d[j], w * dot(pg[i], pg[j]));
        }
    }
    return builder.compress();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Algebraic extension of mhd_flux to transient Runge-Kutta stage states.
// Near a sharp front the stage values between nodes can leave the physical
// region (negative pressure, occasionally negative density at a quadrature
// point); every flux row is rational in rho and stays finite for rho != 0,
// so the stage evaluation goes through. Physical validity is enforced once
// per step at the nodes, when the wave speeds are measured.
std::array<Vec2, n_comp> stage_flux(const MhdState& s, double gamma) {
    const double p = (gamma - 1.0) * (s.E - 0.5 * dot(s.m, s.m) / s.rho - 0.5 * dot(s.B, s.B));
    const Vec2 u = s.m * (1.0 / s.rho);
    const double ptot = p + 0.5 * dot(s.B, s.B);
    std::array<Vec2, n_comp> F;
    F[comp_rho] = s.m;
    F[comp_mx] = u * s.m.x + Vec2{ptot, 0.0} - s.B * s.B.x;
    F[comp_my] = u * s.m.y + Vec2{0.0, ptot} - s.B * s.B.y;
    F[comp_energy] = u * (s.E + ptot) - s.B * dot(u, s.B);
    F[comp_bx] = u * s.B.x - s.B * u.x;
    F[comp_by] = u * s.B.y - s.B * u.y;
    return F;
}

} // namespace

MhdSystem::MhdSystem(Triangulation mesh, int degree, double gamma, MhdBcs bcs)
    : mesh_(std::move(mesh)),
      space_(build_space(mesh_, degree)),
      fine_(fine_submesh_aligned(space_)),
      fine_patches_(fine_dof_patches(space_, fine_)),
      coarse_patches_(dof_patches(space_)),
      geo_(build_nodal_geometry(space_, fine_, fine_patches_)),
      smoother_(space_),
      mass_(consistent_mass(space_)),
      mass_diag_(mass_.diagonal()),
      stiffness_(stiffness_matrix(space_)),
      gamma_(gamma),
      bcs_(std::move(bcs)) {
    if (!(gamma_ > 1.0))
        throw std::invalid_argument("MhdSystem: gamma must exceed 1");
    resolve_boundary();
}

MhdField MhdSystem::interpolate(const std::function<MhdState(Vec2)>& f) const {
    MhdField u(space_.n_dofs);
    for (int i = 0; i < space_.n_dofs; ++i)
        u.set_state(i, f(space_.dof_pos[i]));
    return u;
}

MhdField MhdSystem::assemble_rhs(const MhdField& u, const std::vector<double>& eps) const {
    if (u.n != space_.n_dofs || int(eps.size()) != space_.n_dofs)
        throw std::invalid_argument("assemble_rhs: size mismatch");

    const BasisTable& tab = space_.table(default_quad_degree(space_.degree));
    const int nq = int(tab.rule.points.size());
    const int nl = space_.n_loc;

    MhdField out(space_.n_dofs);
    std::vector<Vec2> pg(nl);
    std::array<double, n_comp> val{};
    std::array<Vec2, n_comp> grad{};

    for (int c = 0; c < mesh_.n_cells(); ++c) {
        const int* d = space_.dofs(c);
        const Mat2& metric = space_.visc_metric[c];
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space_.det_jac[c];
            for (int j = 0; j < nl; ++j)
                pg[j] = space_.phys_grad(c, tab.grad(q, j));

            val.fill(0.0);
            grad.fill(Vec2{});
            double eps_q = 0.0;
            for (int j = 0; j < nl; ++j) {
                const int dj = d[j];
                const double v = tab.val(q, j);
                eps_q += eps[dj] * v;
                for (int cc = 0; cc < n_comp; ++cc) {
                    const double coef = u.at(cc, dj);
                    val[cc] += coef * v;
                    grad[cc] += pg[j] * coef;
                }
            }

            const MhdState s{val[0], {val[1], val[2]}, val[3], {val[4], val[5]}};
            bool finite = true;
            for (double v : val)
                finite = finite && std::isfinite(v);
            if (!finite || s.rho == 0.0)
                throw std::runtime_error("assemble_rhs: unusable state at a quadrature point of cell " +
                                         std::to_string(c) + " (rho=" + fmt17(s.rho) + ")");
            const std::array<Vec2, n_comp> flux = stage_flux(s, gamma_);

            for (int cc = 0; cc < n_comp; ++cc) {
                const Vec2 total = (flux[cc] - metric.apply(grad[cc]) * eps_q) * w;
                for (int j = 0; j < nl; ++j)
                    out.at(cc, d[j]) += dot(total, pg[j]);
            }
        }
    }
    return out;
}

MhdField MhdSystem::mass_solve(const MhdField& rhs, double rel_tol) const {
    MhdField x(space_.n_dofs);
    CgOptions opts;
    opts.rel_tol = rel_tol;
    std::vector<double> b(space_.n_dofs), sol(space_.n_dofs, 0.0);
    for (int c = 0; c < n_comp; ++c) {
        std::copy(rhs.comp(c), rhs.comp(c) + space_.n_dofs, b.begin());
        std::fill(sol.begin(), sol.end(), 0.0);
        const CgResult r = cg_solve(mass_, b, mass_diag_, sol, opts);
        if (!r.converged)
            throw std::runtime_error("mass_solve: CG stalled at residual " + fmt17(r.rel_residual));
        std::copy(sol.begin(), sol.end(), x.comp(c));
    }
    return x;
}

std::vector<double> MhdSystem::wave_speed_field(const MhdField& u) const {
    return patch_max(nodal_wave_bound(u, gamma_), fine_patches_);
}

double MhdSystem::compute_dt(const std::vector<double>& lambda_max, double cfl) const {
    if (int(lambda_max.size()) != space_.n_dofs)
        throw std::invalid_argument("compute_dt: size mismatch");
    double m = 0.0;
    for (int i = 0; i < space_.n_dofs; ++i)
        m = std::max(m, lambda_max[i] * geo_.indicator[i]);
    if (!(m > 0.0) || !std::isfinite(m))
        throw std::runtime_error("compute_dt: wave speed scale is not positive and finite");
    return cfl / m;
}

void MhdSystem::resolve_boundary() {
    if (bcs_.kind.empty())
        return;

    const int n = space_.n_dofs;
    std::vector<char> fixed(n, 0);
    std::vector<std::vector<Vec2>> normals(n);

    // Owner cell of a boundary facet of the fine submesh.
    auto facet_cell = [&](const BoundaryFacet& f) -> int {
        for (int c : fine_patches_.node_cells[space_.node_dof[f.v0]]) {
            const int* v = fine_.cell(c);
            bool has0 = false, has1 = false;
            for (int k = 0; k <= fine_.dim; ++k) {
                has0 = has0 || v[k] == f.v0;
                has1 = has1 || v[k] == f.v1;
            }
            if (has0 && has1)
                return c;
        }
        throw std::runtime_error("resolve_boundary: facet without owner cell");
    };

    for (const BoundaryFacet& f : fine_.boundary_facets) {
        const auto it = bcs_.kind.find(f.tag);
        if (it == bcs_.kind.end())
            continue;
        const int d0 = space_.node_dof[f.v0];
        const int d1 = space_.node_dof[f.v1];
        if (it->second == BcKind::dirichlet) {
            fixed[d0] = fixed[d1] = 1;
            continue;
        }

        Vec2 nrm;
        const Vec2 mid = (fine_.vertices[f.v0] + fine_.vertices[f.v1]) * 0.5;
        const Vec2 centroid = fine_.cell_centroid(facet_cell(f));
        if (fine_.dim == 1) {
            nrm = {mid.x > centroid.x ? 1.0 : -1.0, 0.0};
        } else {
            const Vec2 t = fine_.vertices[f.v1] - fine_.vertices[f.v0];
            nrm = Vec2{t.y, -t.x} * (1.0 / norm(t));
            if (dot(nrm, centroid - mid) > 0.0)
                nrm = nrm * -1.0;
        }
        for (const int d : {d0, d1}) {
            bool seen = false;
            for (const Vec2& known : normals[d])
                seen = seen || norm(known - nrm) < 1e-8;
            if (!seen)
                normals[d].push_back(nrm);
        }
    }

    for (int i = 0; i < n; ++i) {
        if (fixed[i]) {
            dirichlet_dofs_.push_back(i);
        } else if (normals[i].size() == 1) {
            slip_dofs_.push_back(i);
            slip_normals_.push_back(normals[i][0]);
        } else if (normals[i].size() > 1) {
            corner_dofs_.push_back(i);
        }
    }

    if (!dirichlet_dofs_.empty()) {
        if (!bcs_.dirichlet)
            throw std::invalid_argument("resolve_boundary: Dirichlet tag without boundary data");
        dirichlet_values_ = MhdField(int(dirichlet_dofs_.size()));
        for (std::size_t k = 0; k < dirichlet_dofs_.size(); ++k)
            dirichlet_values_.set_state(int(k), bcs_.dirichlet(space_.dof_pos[dirichlet_dofs_[k]]));
    }
}

void MhdSystem::apply_bcs(MhdField& u) const {
    for (std::size_t k = 0; k < dirichlet_dofs_.size(); ++k)
        u.set_state(dirichlet_dofs_[k], dirichlet_values_.state(int(k)));
    for (std::size_t k = 0; k < slip_dofs_.size(); ++k) {
        const int i = slip_dofs_[k];
        const Vec2 nrm = slip_normals_[k];
        const Vec2 m{u.at(comp_mx, i), u.at(comp_my, i)};
        const Vec2 proj = m - nrm * dot(m, nrm);
        u.at(comp_mx, i) = proj.x;
        u.at(comp_my, i) = proj.y;
    }
    for (const int i : corner_dofs_) {
        u.at(comp_mx, i) = 0.0;
        u.at(comp_my, i) = 0.0;
    }
}

namespace {

// Load vector b_i = (div B_h, phi_i).
std::vector<double> div_load(const LagrangeSpace& space, const MhdField& u) {
    const Triangulation& mesh = *space.mesh;
    const BasisTable& tab = space.table(2 * space.degree);
    const int nq = int(tab.rule.points.size());
    const int nl = space.n_loc;

    std::vector<double> b(space.n_dofs, 0.0);
    std::vector<Vec2> pg(nl);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = space.dofs(c);
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space.det_jac[c];
            double div = 0.0;
            for (int j = 0; j < nl; ++j) {
                pg[j] = space.phys_grad(c, tab.grad(q, j));
                div += u.at(comp_bx, d[j]) * pg[j].x + u.at(comp_by, d[j]) * pg[j].y;
            }
            for (int j = 0; j < nl; ++j)
                b[d[j]] += w * div * tab.val(q, j);
        }
    }
    return b;
}

} // namespace

double MhdSystem::projected_div_norm(const MhdField& u) const {
    const std::vector<double> b = div_load(space_, u);
    std::vector<double> d(space_.n_dofs, 0.0);
    CgOptions opts;
    opts.rel_tol = 1e-12;
    if (!cg_solve(mass_, b, mass_diag_, d, opts).converged)
        throw std::runtime_error("projected_div_norm: mass solve stalled");
    double e = 0.0;
    for (int i = 0; i < space_.n_dofs; ++i)
        e += d[i] * b[i]; // d' M d up to the solver tolerance
    return std::sqrt(std::max(e, 0.0));
}

CleanReport MhdSystem::clean_divergence(MhdField& u) const {
    CleanReport rep;
    const std::vector<double> b = div_load(space_, u);

    {
        std::vector<double> d(space_.n_dofs, 0.0);
        CgOptions opts;
        opts.rel_tol = 1e-12;
        if (!cg_solve(mass_, b, mass_diag_, d, opts).converged)
            throw std::runtime_error("clean_divergence: mass solve stalled");
        double e = 0.0;
        for (int i = 0; i < space_.n_dofs; ++i)
            e += d[i] * b[i];
        rep.div_before = std::sqrt(std::max(e, 0.0));
    }

    // (grad psi, grad v) = -(div B, v); natural boundary, kernel of constants.
    std::vector<double> rhs(space_.n_dofs);
    for (int i = 0; i < space_.n_dofs; ++i)
        rhs[i] = -b[i];
    std::vector<double> psi(space_.n_dofs, 0.0);
    CgOptions popts;
    popts.rel_tol = 1e-12;
    popts.max_iter = 200000;
    popts.remove_mean = true;
    if (!cg_solve(stiffness_, rhs, psi, popts).converged)
        throw std::runtime_error("clean_divergence: Poisson solve stalled");

    // L2 projection of grad psi onto the vector space, then B <- B - g.
    const BasisTable& tab = space_.table(2 * space_.degree);
    const int nq = int(tab.rule.points.size());
    const int nl = space_.n_loc;
    std::vector<double> gx(space_.n_dofs, 0.0), gy(space_.n_dofs, 0.0);
    std::vector<Vec2> pg(nl);
    for (int c = 0; c < mesh_.n_cells(); ++c) {
        const int* d = space_.dofs(c);
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space_.det_jac[c];
            Vec2 g{};
            for (int j = 0; j < nl; ++j) {
                pg[j] = space_.phys_grad(c, tab.grad(q, j));
                g += pg[j] * psi[d[j]];
            }
            for (int j = 0; j < nl; ++j) {
                const double v = w * tab.val(q, j);
                gx[d[j]] += v * g.x;
                gy[d[j]] += v * g.y;
            }
        }
    }
    CgOptions mopts;
    mopts.rel_tol = 1e-12;
    std::vector<double> sol(space_.n_dofs, 0.0);
    if (!cg_solve(mass_, gx, mass_diag_, sol, mopts).converged)
        throw std::runtime_error("clean_divergence: projection solve stalled");
    for (int i = 0; i < space_.n_dofs; ++i)
        u.at(comp_bx, i) -= sol[i];
    std::fill(sol.begin(), sol.end(), 0.0);
    if (!cg_solve(mass_, gy, mass_diag_, sol, mopts).converged)
        throw std::runtime_error("clean_divergence: projection solve stalled");
    for (int i = 0; i < space_.n_dofs; ++i)
        u.at(comp_by, i) -= sol[i];

    rep.div_after = projected_div_norm(u);
    return rep;
}

DivergenceError MhdSystem::divergence_error(const MhdField& u) const {
    DivergenceError err;
    err.div_norm = projected_div_norm(u);

    const BasisTable& tab = space_.table(2 * space_.degree);
    const int nq = int(tab.rule.points.size());
    const int nl = space_.n_loc;
    double curl2 = 0.0;
    std::vector<Vec2> pg(nl);
    for (int c = 0; c < mesh_.n_cells(); ++c) {
        const int* d = space_.dofs(c);
        for (int q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * space_.det_jac[c];
            double curl = 0.0;
            for (int j = 0; j < nl; ++j) {
                pg[j] = space_.phys_grad(c, tab.grad(q, j));
                curl += u.at(comp_by, d[j]) * pg[j].x - u.at(comp_bx, d[j]) * pg[j].y;
            }
            curl2 += w * curl * curl;
        }
    }
    err.curl_norm = std::sqrt(curl2);
    err.curl_near_zero = err.curl_norm <= 1e-12 * err.div_norm;
    if (err.curl_norm > 0.0)
        err.delta = err.div_norm / err.curl_norm;
    else
        err.delta = err.div_norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return err;
}

MhdField MhdSystem::rk_step(const MhdField& u, const std::vector<double>& eps, double tau,
                            const ButcherTableau& tab, double mass_tol) const {
    if (!(tau > 0.0))
        throw std::invalid_argument("rk_step: step size must be positive");

    const std::size_t len = u.data.size();
    std::vector<MhdField> k(tab.stages);
    MhdField w(u.n);
    for (int l = 0; l < tab.stages; ++l) {
        w.data = u.data;
        for (int j = 0; j < l; ++j) {
            const double a = tab.coeff(l, j);
            if (a == 0.0)
                continue;
            for (std::size_t p = 0; p < len; ++p)
                w.data[p] += tau * a * k[j].data[p];
        }
        apply_bcs(w);
        k[l] = mass_solve(assemble_rhs(w, eps), mass_tol);
    }

    MhdField next = u;
    for (int l = 0; l < tab.stages; ++l) {
        const double bl = tab.b[l];
        for (std::size_t p = 0; p < len; ++p)
            next.data[p] += tau * bl * k[l].data[p];
    }
    return next;
}

RunResult run_mhd(MhdSystem& sys, MhdField u0, const SolverConfig& cfg, StepHook hook) {
    if (cfg.t_final < 0.0)
        throw std::invalid_argument("run_mhd: negative final time");
    if (u0.n != sys.space().n_dofs)
        throw std::invalid_argument("run_mhd: state size mismatch");

    TimeLoopState st;
    st.u = std::move(u0);
    sys.apply_bcs(st.u);

    RunDiagnostics diag;
    auto stage = [&](const char* name) {
        if (hook)
            hook(name, st);
    };

    std::vector<double> lambda = sys.wave_speed_field(st.u);
    st.tau = sys.compute_dt(lambda, cfg.cfl);

    const double t_end = cfg.t_final;
    while (t_end - st.t > 1e-12 * std::max(t_end, 1.0) && st.step < cfg.max_steps) {
        const bool clipped = st.t + st.tau >= t_end;
        if (clipped)
            st.tau = t_end - st.t;
        const double tau = st.tau;

        try {
            stage("residual");
            std::vector<double> eps;
            const std::vector<double> eps_cap = first_order_viscosity(lambda, sys.geometry());
            if (cfg.first_order_only) {
                stage("viscosity");
                eps = eps_cap;
            } else {
                const MhdField* dt_ptr = nullptr;
                MhdField dt_field;
                if (st.history_levels > 0) {
                    const BdfWeights bw = bdf_weights(st.history_levels, st.tau_prev, st.tau_prev2);
                    dt_field = MhdField(st.u.n);
                    for (std::size_t p = 0; p < dt_field.data.size(); ++p) {
                        double v = bw.w0 * st.u.data[p] + bw.w1 * st.u_prev.data[p];
                        if (bw.levels == 2)
                            v += bw.w2 * st.u_prev2.data[p];
                        dt_field.data[p] = v;
                    }
                    dt_ptr = &dt_field;
                }
                const MhdResidual res = mhd_residual(sys.smoother(), sys.space(), st.u, dt_ptr, sys.gamma());
                const std::array<std::vector<double>, 4> groups = residual_groups(st.u);
                std::array<std::vector<double>, 4> psi;
                for (int g = 0; g < 4; ++g)
                    psi[g] = normalization(groups[g], sys.coarse_patches(), sys.geometry().lumped,
                                           sys.mesh().domain_measure());

                stage("viscosity");
                eps = residual_viscosity(res, psi, lambda, sys.geometry());
                for (int i = 0; i < sys.space().n_dofs; ++i)
                    if (eps[i] > eps_cap[i])
                        ++diag.cap_violations;
            }
            diag.eps_max_series.push_back(*std::max_element(eps.begin(), eps.end()));

            stage("rk");
            MhdField next = sys.rk_step(st.u, eps, tau, cfg.tableau, cfg.mass_tol);

            stage("cleaning");
            if (cfg.clean_divergence && sys.mesh().dim == 2)
                diag.clean_reports.push_back(sys.clean_divergence(next));

            stage("bcs");
            sys.apply_bcs(next);

            st.u_prev2 = std::move(st.u_prev);
            st.u_prev = std::move(st.u);
            st.u = std::move(next);
            st.tau_prev2 = st.tau_prev;
            st.tau_prev = tau;
            st.history_levels = std::min(st.history_levels + 1, 2);
            st.t = clipped ? t_end : st.t + tau;
            ++st.step;

            for (std::size_t p = 0; p < st.u.data.size(); ++p)
                if (!std::isfinite(st.u.data[p]))
                    throw std::runtime_error("state is not finite (component " +
                                             std::to_string(p / std::size_t(st.u.n)) + ", dof " +
                                             std::to_string(p % std::size_t(st.u.n)) + ")");

            stage("lambda_max");
            lambda = sys.wave_speed_field(st.u);
            stage("dt");
            st.tau = sys.compute_dt(lambda, cfg.cfl);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_mhd: step " + std::to_string(st.step + 1) + " at t=" +
                                     fmt17(st.t) + ": " + e.what());
        }

        diag.steps = st.step;
        diag.time_series.push_back(st.t);
        if (cfg.track_divergence && sys.mesh().dim == 2)
            diag.delta_series.push_back(sys.divergence_error(st.u).delta);
    }

    return {std::move(st), std::move(diag)};
}

void write_checkpoint(std::ostream& os, const TimeLoopState& s) {
    os << "mhdnv-checkpoint 1\n";
    os << s.step << ' ' << fmt17(s.t) << ' ' << fmt17(s.tau) << ' ' << fmt17(s.tau_prev) << ' '
       << fmt17(s.tau_prev2) << ' ' << s.history_levels << ' ' << s.u.n << '\n';
    const int n = s.u.n;
    auto block = [&](const MhdField& f) {
        for (int c = 0; c < n_comp; ++c) {
            for (int i = 0; i < n; ++i) {
                if (i)
                    os << ' ';
                os << fmt17(f.n == n ? f.at(c, i) : 0.0);
            }
            os << '\n';
        }
    };
    block(s.u);
    block(s.u_prev);
    block(s.u_prev2);
}

TimeLoopState read_checkpoint(std::istream& is) {
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (!is || magic != "mhdnv-checkpoint" || version != 1)
        throw std::runtime_error("read_checkpoint: unrecognized header");

    TimeLoopState s;
    int n = 0;
    is >> s.step >> s.t >> s.tau >> s.tau_prev >> s.tau_prev2 >> s.history_levels >> n;
    if (!is || n < 0)
        throw std::runtime_error("read_checkpoint: bad scalar line");
    s.u = MhdField(n);
    s.u_prev = MhdField(n);
    s.u_prev2 = MhdField(n);
    for (MhdField* f : {&s.u, &s.u_prev, &s.u_prev2})
        for (double& v : f->data)
            if (!(is >> v))
                throw std::runtime_error("read_checkpoint: truncated data block");
    return s;
}

} // namespace mhdnv
