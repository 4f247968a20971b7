#pragma once

#include "mhdnv/solver.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mhdnv {

// One benchmark problem: rectangular domain, adiabatic constant, initial
// data, boundary treatment, and the operating point (CFL, final time).
// Stochastic initial data draws its noise from the seed argument through a
// position hash, so fields are reproducible and mesh-independent.
struct ProblemSpec {
    std::string name;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    double gamma = 5.0 / 3.0;
    bool periodic_x = false;
    bool periodic_y = false;
    // Single element row in y of height (x1 - x0) / nx, periodic in y; the
    // mesh resolution argument then counts x intervals only.
    bool pseudo_1d = false;
    double cfl = 0.3;
    double t_final = 0.0;
    std::function<MhdState(Vec2, uint64_t)> initial;
    std::function<MhdState(Vec2, double)> exact; // unset when no closed form
    std::map<int, BcKind> bc;                    // tags of non-periodic sides
    std::string notes;
};

// All benchmark problems keyed by name. The blast radius and the
// Kelvin-Helmholtz horizontal field are the two configurable constants.
std::map<std::string, ProblemSpec> registry(double blast_radius = 0.1, double kh_bx = 0.0);

// Mesh for a problem at resolution nx (ny defaults to the aspect-matched
// count; ignored for pseudo-1D strips).
Triangulation problem_mesh(const ProblemSpec& pr, int nx, int ny = 0, double perturb = 0.0,
                           uint64_t mesh_seed = 0);

// Boundary conditions of the spec with Dirichlet data frozen to the initial
// state.
MhdBcs problem_bcs(const ProblemSpec& pr, uint64_t seed = 0);

// Relative errors of one field against a pointwise exact solution.
struct ErrorRow {
    std::string var; // rho, u, p, B, E
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

struct ErrorReport {
    int dofs = 0;
    std::vector<ErrorRow> rows;
    const ErrorRow& row(const std::string& var) const;
};

// L1/L2 by quadrature of exactness degree 2k + 4; Linf additionally sampled
// at the nodes. Velocity and pressure are derived from the conserved
// interpolant pointwise; vector variables use the Euclidean magnitude of the
// pointwise difference. Norms are relative unless the exact norm vanishes.
ErrorReport error_norms(const MhdField& u, const std::function<MhdState(Vec2)>& exact,
                        const LagrangeSpace& space, double gamma);

// Convergence table rows in CSV order, one per (report, variable, norm),
// with the observed rate against the previous report (nan on the first).
struct ConvergenceRow {
    int dofs = 0;
    std::string var;
    std::string norm; // l1, l2, linf
    double error = 0.0;
    double rate = 0.0;
};
std::vector<ConvergenceRow> convergence_rows(const std::vector<ErrorReport>& reports, int dim);

// Shock visualization field sigma_i = exp(-zeta |grad rho|_i / max |grad rho|)
// with the nodal gradient recovered by lumped-mass L2 projection. Constant
// density gives sigma = 1 everywhere. Two-dimensional meshes only.
std::vector<double> schlieren(const std::vector<double>& rho, const LagrangeSpace& space,
                              const NodalGeometry& geo, double zeta = 5.0);

} // namespace mhdnv
