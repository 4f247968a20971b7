#pragma once

#include "mhdnv/fespace.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mhdnv {

// Scalar conservation law q_t + div f(q) = 0 on a P1 space, stepped with
// lumped-mass forward Euler and the nodal first-order viscosity. Under the
// step bound from scalar_cfl the update is a convex combination of the old
// patch values, so it obeys a local discrete maximum principle.
struct ScalarProblem {
    // f'(q) at a physical point; the space argument covers advection fields
    // like (-y, x) q. 1D problems use the x component.
    std::function<Vec2(Vec2 x, double q)> fprime;
    std::function<double(Vec2)> q0; // initial data, optional for stepping
    double beta = 0.0;              // sup |f'| over the domain and data range
};

// eps_i = C_i m_i^fine sup_{S_i}|f'| Phi_i. The sup samples the patch's
// nodal values and the quadrature-point interpolants of every patch cell,
// which is what the convex-combination argument of the step needs.
std::vector<double> scalar_first_order_viscosity(const std::vector<double>& q,
                                                 const ScalarProblem& pr,
                                                 const LagrangeSpace& space,
                                                 const NodalGeometry& geo,
                                                 const PatchTable& patches);

// One forward-Euler step of the regularized form
//   m_i (Q'_i - W_i)/tau + (f'(q_frozen) . grad w_h, phi_i) + b(w_h, phi_i) = 0
// applied to w with the transport coefficient and the viscosity frozen, so
// the map is affine in w; probing it with unit vectors exposes the convex
// combination. The viscous cell integral uses the nodal-average identity
// (eps_h is linear, the metric gradient product is constant per cell).
std::vector<double> scalar_frozen_step(const std::vector<double>& w,
                                       const std::vector<double>& q_frozen,
                                       const std::vector<double>& eps, double tau,
                                       const ScalarProblem& pr, const LagrangeSpace& space,
                                       const NodalGeometry& geo);

// scalar_frozen_step with the coefficients taken from q itself.
std::vector<double> scalar_euler_step(const std::vector<double>& q,
                                      const std::vector<double>& eps, double tau,
                                      const ScalarProblem& pr, const LagrangeSpace& space,
                                      const NodalGeometry& geo);

// Largest maximum-principle-safe step. cfl = 1 / ((1 + d kappa) kappa) with
// kappa the worst patch cell-size ratio, and tau_max = cfl / (beta gmax) with
// gmax the largest basis gradient norm. beta = 0 gives an unbounded tau_max.
struct ScalarCfl {
    double tau_max = 0.0;
    double cfl = 0.0;
};
ScalarCfl scalar_cfl(const NodalGeometry& geo, int dim, double beta, double kappa);

// Local discrete maximum principle check: every q1 node value must stay
// within the patch range of q0, with slack 1e-12 of the global q0 range.
struct DmpReport {
    std::vector<int> violators;
    bool ok() const { return violators.empty(); }
};
DmpReport dmp_check(const std::vector<double>& q0, const std::vector<double>& q1,
                    const PatchTable& patches);

// Both sides of the nodal-average identity for the viscous cell integral,
//   int_K eps_h (J^T grad phi_j).(J^T grad phi_i)
//     = (1/(d+1)) sum_l eps_l int_K (J^T grad phi_j).(J^T grad phi_i),
// computed independently: the left by quadrature of the full integrand, the
// right from the closed-form stencil. eps_nodes holds the nodal viscosity in
// local vertex order (third entry unused in 1D).
struct TrapezoidSides {
    double quadrature = 0.0;
    double closed_form = 0.0;
};
TrapezoidSides trapezoid_identity_check(const Triangulation& mesh, int cell,
                                        const std::array<double, 3>& eps_nodes, int i_loc,
                                        int j_loc);

} // namespace mhdnv
