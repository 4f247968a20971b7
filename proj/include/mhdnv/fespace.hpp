#pragma once

#include "mhdnv/linalg.hpp"
#include "mhdnv/mesh.hpp"
#include "mhdnv/quadrature.hpp"

#include <array>
#include <functional>
#include <map>
#include <vector>

namespace mhdnv {

// Equispaced Lagrange basis of degree k on the unit reference simplex.
// Local nodes follow the principal-lattice order used by LatticeNodes.
struct ReferenceBasis {
    int dim = 1;
    int degree = 1;
    int n_loc = 0;
    std::vector<std::array<int, 3>> multi; // barycentric multiplicities per node
    std::vector<Vec2> nodes;               // reference coordinates per node

    void eval(const Vec2& xhat, double* values) const;
    // Gradients with respect to the reference coordinates.
    void grad(const Vec2& xhat, Vec2* gradients) const;
};

ReferenceBasis reference_basis(int dim, int degree);

// Basis values and reference gradients tabulated at the points of one rule.
struct BasisTable {
    QuadratureRule rule;
    int n_loc = 0;
    std::vector<double> vals; // [q * n_loc + j]
    std::vector<Vec2> grads;  // [q * n_loc + j]

    double val(int q, int j) const { return vals[std::size_t(q) * n_loc + j]; }
    const Vec2& grad(int q, int j) const { return grads[std::size_t(q) * n_loc + j]; }
};

// Continuous scalar Lagrange space of degree k. Geometric nodes shared by
// neighbouring cells are merged by position hashing; nodes identified by the
// mesh's periodic axes share one degree of freedom.
struct LagrangeSpace {
    const Triangulation* mesh = nullptr;
    int dim = 1;
    int degree = 1;
    int n_loc = 0;
    int n_dofs = 0;

    ReferenceBasis ref;
    LatticeNodes lattice;        // geometric nodes, per-cell lattice ids
    std::vector<int> node_dof;   // geometric node -> dof
    std::vector<Vec2> dof_pos;   // canonical position per dof
    std::vector<int> cell_dofs;  // n_loc dof ids per cell

    // Per-cell affine map data (unit reference simplex -> cell).
    std::vector<Mat2> inv_jac_t; // transposed inverse Jacobian
    std::vector<double> det_jac; // |det|
    // Metric of the equilateral-reference map, J_K J_K^T per cell.
    std::vector<Mat2> visc_metric;

    const int* dofs(int c) const { return cell_dofs.data() + std::size_t(c) * n_loc; }

    // Physical gradient of local basis j of cell c given its reference gradient.
    Vec2 phys_grad(int c, const Vec2& ref_grad) const { return inv_jac_t[c].apply(ref_grad); }

    // Tabulated basis at a rule exact to `quad_degree` (cached).
    const BasisTable& table(int quad_degree) const;

    // Nodal interpolation of a scalar function (evaluated at canonical positions).
    std::vector<double> interpolate(const std::function<double(Vec2)>& f) const;

private:
    mutable std::map<int, BasisTable> tables_;
};

LagrangeSpace build_space(const Triangulation& mesh, int degree);

// Default assembly accuracy for a degree-k space.
inline int default_quad_degree(int degree) { return 2 * degree + 1; }

// Fine submesh whose vertex i is geometric node i of the space, so nodal
// data indexed by space.node_dof lines up with the fine vertices.
Triangulation fine_submesh_aligned(const LagrangeSpace& space);

// Patches of the space's dofs against the coarse cells.
PatchTable dof_patches(const LagrangeSpace& space);

// Patches of the space's dofs against the fine submesh cells. Periodically
// identified nodes contribute the union of their patches.
PatchTable fine_dof_patches(const LagrangeSpace& space, const Triangulation& fine);

// m_i = integral of basis function i (quadrature exact for the integrand).
std::vector<double> lumped_mass(const LagrangeSpace& space);

// Lumped mass of the continuous P1 space on the fine submesh, accumulated per dof.
std::vector<double> lumped_mass_fine(const LagrangeSpace& space, const Triangulation& fine);

// M_ij = (phi_j, phi_i), assembled with quadrature exact for degree 2k.
CsrMatrix consistent_mass(const LagrangeSpace& space);

// Largest P1 gradient magnitude of any neighbour basis over the patch of
// each dof on the fine submesh: max over j != i in I(S_i) of |grad phi_j|.
std::vector<double> patch_indicator(const LagrangeSpace& space, const Triangulation& fine,
                                    const PatchTable& fine_patches);

// C_i = (d+1) / (2 Nel(S_i) min_{K in S_i} |K|), patches on the fine submesh.
// Nel counts basis-function incidences, so C_i m_i^fine = 1/2 on uniform
// meshes even across a single-layer periodic identification.
std::vector<double> viscosity_constant(const LagrangeSpace& space, const Triangulation& fine,
                                       const PatchTable& fine_patches);

// Per-node geometric data the viscosity construction needs.
struct NodalGeometry {
    std::vector<double> lumped;      // m_i of the degree-k space
    std::vector<double> lumped_fine; // m_i of the fine P1 space
    std::vector<double> indicator;   // Phi_i
    std::vector<double> constant;    // C_i
    std::vector<double> quality;     // kappa_i, fine patches
};

NodalGeometry build_nodal_geometry(const LagrangeSpace& space, const Triangulation& fine,
                                   const PatchTable& fine_patches);

// Integrals (J^T grad phi_j) . (J^T grad phi_i) over one cell for the P1
// vertex basis, with J the equilateral-reference Jacobian. Row-major
// (d+1) x (d+1); unused entries stay zero in 1D.
std::array<double, 9> p1_stencil_matrix(const Triangulation& mesh, int cell);

} // namespace mhdnv
