#pragma once

#include "mhdnv/fespace.hpp"
#include "mhdnv/linalg.hpp"
#include "mhdnv/mhd.hpp"

#include <array>
#include <vector>

namespace mhdnv {

// Shared nodal viscosity coefficient, one value per dof of the solution space.
struct ViscosityField {
    std::vector<double> eps;
    int built_step = -1;
};

// eps^L_i = C_i * m_i^fine * lambda_i * Phi_i. `lambda_max` is the patch max
// of the nodal wave-speed bound on the fine submesh.
std::vector<double> first_order_viscosity(const std::vector<double>& lambda_max,
                                          const NodalGeometry& geo);

// One-sided variable-step BDF weights at the newest time level:
//   D_t u(t^n) ~ w0 u^n + w1 u^{n-1} + w2 u^{n-2},
// tau1 = t^n - t^{n-1}, tau2 = t^{n-1} - t^{n-2}. With `levels` history
// states: 2 -> BDF2, 1 -> BDF1, 0 -> zero derivative.
struct BdfWeights {
    double w0 = 0.0, w1 = 0.0, w2 = 0.0;
    int levels = 0;
};
BdfWeights bdf_weights(int levels, double tau1, double tau2);

// Elliptic smoothing of a nonnegative residual density r >= 0:
//   (R, V) + sum_K (|K|^{2/d} / k) (grad R, grad V)_K = (r, V)  for all V,
// solved in the solution space itself.
class ResidualSmoother {
public:
    explicit ResidualSmoother(const LagrangeSpace& space);

    // integrand[cell * nq + q] samples r at the points of rule(); the result
    // is the nodal projection, sign preserved.
    std::vector<double> project(const std::vector<double>& integrand) const;

    const QuadratureRule& rule() const { return table_->rule; }
    const CsrMatrix& system() const { return system_; }

private:
    const LagrangeSpace* space_;
    const BasisTable* table_;
    CsrMatrix system_;
    std::vector<double> diag_;
};

// Nodal smoothed residuals of the planar MHD system, grouped as the four
// entries {rho, energy, |momentum|, |magnetic|}. The signed component
// residuals are projected first and only then folded to magnitudes (absolute
// value for the scalars, Euclidean norm for the vector groups). Taking |.|
// under the integral instead would kill the cross-cell cancellation that
// keeps the nodal residual at the accuracy of the scheme on smooth data.
struct MhdResidual {
    std::vector<double> rho, energy, momentum, magnetic;

    const std::vector<double>& group(int g) const {
        switch (g) {
        case 0: return rho;
        case 1: return energy;
        case 2: return momentum;
        default: return magnetic;
        }
    }
};

// d_tau is the nodal BDF combination (nullptr for a zero time derivative).
MhdResidual mhd_residual(const ResidualSmoother& smoother, const LagrangeSpace& space,
                         const MhdField& u, const MhdField* d_tau, double gamma);

// Residual normalization: Psi_i = 1/4 ||x - xbar||_inf (1 - theta_i) + 1e-8 ||x||_inf,
// with xbar the mass-weighted mean and theta_i = (patch range)/(global range).
// Norms are nodal max norms. A field whose global range is below 1e-2 of its
// max magnitude is flat to working accuracy: it carries no information about
// discontinuities, and normalizing a residual by its numerical noise would
// pin the viscosity at the first-order cap. Flat fields return Psi = +inf
// everywhere, which removes the component from the residual vote.
std::vector<double> normalization(const std::vector<double>& x, const PatchTable& patches,
                                  const std::vector<double>& lumped, double domain_measure);

// Nodal magnitude fields matching the residual groups: {rho, E, |m|, |B|}.
std::array<std::vector<double>, 4> residual_groups(const MhdField& u);

// eps^RV_i = C_i * min(lambda_i Phi_i, max_g R_g,i / Psi_g,i) * m_i^fine.
// A zero residual contributes zero; a zero Psi under a positive residual
// saturates the cap.
std::vector<double> residual_viscosity(const MhdResidual& R,
                                       const std::array<std::vector<double>, 4>& psi,
                                       const std::vector<double>& lambda_max,
                                       const NodalGeometry& geo);

} // namespace mhdnv
