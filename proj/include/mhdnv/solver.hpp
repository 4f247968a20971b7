#pragma once

#include "mhdnv/viscosity.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mhdnv {

enum class BcKind { dirichlet, slip };

// Strong boundary conditions keyed by facet tag. Dirichlet overwrites the
// full conserved state with `dirichlet(x)`; slip removes the normal momentum
// component (both constraints at corners, which zeroes the momentum).
// Periodic sides carry no tag and are handled by dof identification.
struct MhdBcs {
    std::map<int, BcKind> kind;
    std::function<MhdState(Vec2)> dirichlet;
};

struct ButcherTableau {
    int stages = 0;
    std::vector<double> a; // row-major strictly lower triangle, stages x stages
    std::vector<double> b;
    std::vector<double> c;

    double coeff(int l, int j) const { return a[static_cast<std::size_t>(l) * stages + j]; }
};

ButcherTableau rk4_classic();

struct CleanReport {
    double div_before = 0.0; // projected L2 norm of div B before the correction
    double div_after = 0.0;
};

struct DivergenceError {
    double delta = 0.0;    // ||div B||_proj / ||curl B||
    double div_norm = 0.0;
    double curl_norm = 0.0;
    bool curl_near_zero = false;
};

// Spatial discretization of the planar ideal-MHD system on one mesh:
// Galerkin flux + nodal viscous form, consistent-mass solves, strong BCs,
// and the divergence-cleaning projection. Owns the mesh.
class MhdSystem {
public:
    MhdSystem(Triangulation mesh, int degree, double gamma, MhdBcs bcs);
    MhdSystem(const MhdSystem&) = delete;
    MhdSystem& operator=(const MhdSystem&) = delete;

    const Triangulation& mesh() const { return mesh_; }
    const LagrangeSpace& space() const { return space_; }
    const Triangulation& fine() const { return fine_; }
    const PatchTable& fine_patches() const { return fine_patches_; }
    const PatchTable& coarse_patches() const { return coarse_patches_; }
    const NodalGeometry& geometry() const { return geo_; }
    const ResidualSmoother& smoother() const { return smoother_; }
    const CsrMatrix& mass() const { return mass_; }
    double gamma() const { return gamma_; }

    // Nodal interpolation of an analytic state.
    MhdField interpolate(const std::function<MhdState(Vec2)>& f) const;

    // Load vector of M dU/dt = F(U): for every dof i and component,
    //   F_i = (F_flux(U), grad phi_i) - sum_K int_K eps_h (J_K J_K^T grad U) . grad phi_i,
    // the flux term in integrated-by-parts form (no boundary integral;
    // boundary dofs are corrected strongly afterwards).
    MhdField assemble_rhs(const MhdField& u, const std::vector<double>& eps) const;

    // Consistent-mass solve per component.
    MhdField mass_solve(const MhdField& rhs, double rel_tol) const;

    // Fine-patch max of the nodal wave-speed bound.
    std::vector<double> wave_speed_field(const MhdField& u) const;

    // tau = cfl / max_i(lambda_i Phi_i).
    double compute_dt(const std::vector<double>& lambda_max, double cfl) const;

    void apply_bcs(MhdField& u) const;

    // B <- B' - grad(psi) with (grad psi, grad v) = -(div B', v); the gradient
    // is L2-projected onto the vector space before subtraction. Conserved
    // hydro variables are untouched; derived quantities follow from the EOS
    // with the corrected field.
    CleanReport clean_divergence(MhdField& u) const;

    DivergenceError divergence_error(const MhdField& u) const;

    // Projected L2 norm of div B (mass solve + energy norm).
    double projected_div_norm(const MhdField& u) const;

    // Explicit RK step with the viscosity frozen; strong BCs are applied to
    // every stage state before its evaluation.
    MhdField rk_step(const MhdField& u, const std::vector<double>& eps, double tau,
                     const ButcherTableau& tab, double mass_tol) const;

private:
    Triangulation mesh_;
    LagrangeSpace space_;
    Triangulation fine_;
    PatchTable fine_patches_;
    PatchTable coarse_patches_;
    NodalGeometry geo_;
    ResidualSmoother smoother_;
    CsrMatrix mass_;
    std::vector<double> mass_diag_;
    CsrMatrix stiffness_; // Poisson operator for the cleaning projection
    double gamma_;
    MhdBcs bcs_;

    std::vector<int> dirichlet_dofs_;
    MhdField dirichlet_values_;
    std::vector<int> slip_dofs_;
    std::vector<Vec2> slip_normals_;
    std::vector<int> corner_dofs_;

    void resolve_boundary();
};

struct SolverConfig {
    double cfl = 0.3;
    double t_final = 0.0;
    bool clean_divergence = true;
    bool first_order_only = false; // eps^L instead of eps^RV
    bool track_divergence = true;  // record delta(t) after every step
    double mass_tol = 1e-10;
    int max_steps = 10000000;
    ButcherTableau tableau = rk4_classic();
};

struct TimeLoopState {
    int step = 0;
    double t = 0.0;
    double tau = 0.0;       // size of the next step
    double tau_prev = 0.0;  // t^n - t^{n-1}
    double tau_prev2 = 0.0; // t^{n-1} - t^{n-2}
    int history_levels = 0;
    MhdField u, u_prev, u_prev2;
};

struct RunDiagnostics {
    int steps = 0;
    int cap_violations = 0; // nodes where eps^RV exceeded eps^L (must stay 0)
    std::vector<double> time_series;
    std::vector<double> delta_series;       // divergence error after each step
    std::vector<CleanReport> clean_reports; // one per cleaning application
    std::vector<double> eps_max_series;
};

struct RunResult {
    TimeLoopState state;
    RunDiagnostics diag;
};

// Stage labels in execution order: "residual", "viscosity", "rk", "cleaning",
// "bcs", "lambda_max", "dt".
using StepHook = std::function<void(const char* stage, const TimeLoopState&)>;

RunResult run_mhd(MhdSystem& sys, MhdField u0, const SolverConfig& cfg, StepHook hook = {});

// Plain-text checkpoint of the loop state. Layout: a format line, one line of
// scalars "step t tau tau_prev tau_prev2 levels n", then three blocks of
// 6n coefficients (u, u_prev, u_prev2), component-major, 17 digits.
void write_checkpoint(std::ostream& os, const TimeLoopState& s);
TimeLoopState read_checkpoint(std::istream& is);

} // namespace mhdnv
