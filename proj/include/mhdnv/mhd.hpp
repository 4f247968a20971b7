#pragma once

#include "mhdnv/geom.hpp"
#include "mhdnv/mesh.hpp"

#include <array>
#include <vector>

namespace mhdnv {

// Planar ideal MHD: six conserved fields per node.
inline constexpr int n_comp = 6;
enum MhdComponent { comp_rho = 0, comp_mx = 1, comp_my = 2, comp_energy = 3, comp_bx = 4, comp_by = 5 };

struct MhdState {
    double rho = 0.0;
    Vec2 m;
    double E = 0.0;
    Vec2 B;
};

// Nodal coefficient block, component-major: data[c * n + i].
struct MhdField {
    int n = 0;
    std::vector<double> data;

    MhdField() = default;
    explicit MhdField(int n_dofs) : n(n_dofs), data(static_cast<std::size_t>(n_comp) * n_dofs, 0.0) {}

    double& at(int c, int i) { return data[static_cast<std::size_t>(c) * n + i]; }
    double at(int c, int i) const { return data[static_cast<std::size_t>(c) * n + i]; }
    double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * n; }
    const double* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * n; }

    MhdState state(int i) const {
        return {at(comp_rho, i), {at(comp_mx, i), at(comp_my, i)}, at(comp_energy, i),
                {at(comp_bx, i), at(comp_by, i)}};
    }
    void set_state(int i, const MhdState& s) {
        at(comp_rho, i) = s.rho;
        at(comp_mx, i) = s.m.x;
        at(comp_my, i) = s.m.y;
        at(comp_energy, i) = s.E;
        at(comp_bx, i) = s.B.x;
        at(comp_by, i) = s.B.y;
    }
};

// E - |m|^2/(2 rho) - |B|^2/2; requires rho > 0.
double internal_energy(const MhdState& s);

// p = (gamma - 1) * internal energy.
double pressure(const MhdState& s, double gamma);

// Assemble the conserved state from primitive (rho, u, p, B).
MhdState conserved_state(double rho, Vec2 u, double p, Vec2 B, double gamma);

// Finite, rho > 0, positive internal energy.
bool state_valid(const MhdState& s);

// Column c is the flux vector of conserved component c:
//   mass          m
//   momentum a    m_a u + (p + |B|^2/2) e_a - B_a B
//   energy        u (E + p + |B|^2/2) - B (u.B)
//   induction a   B_a u - u_a B
std::array<Vec2, n_comp> mhd_flux(const MhdState& s, double gamma);

struct WaveSpeeds {
    double sound = 0.0;  // a = sqrt(gamma p / rho)
    double alfven = 0.0; // |B.e| / sqrt(rho)
    double fast = 0.0;
    double slow = 0.0;
    std::array<double, 8> eigenvalues{}; // u.e -/+ {fast, alfven, slow}, u.e twice
};

// Characteristic speeds in unit direction e; requires a valid state.
WaveSpeeds wave_speeds(const MhdState& s, double gamma, Vec2 e);
double fast_speed(const MhdState& s, double gamma, Vec2 e);

// Direction-free bound |u| + sqrt(a^2 + |B|^2/rho) >= |u.e| + c_f(e) for all e.
double wave_speed_bound(const MhdState& s, double gamma);

// Per-dof wave_speed_bound; throws naming the first invalid node.
std::vector<double> nodal_wave_bound(const MhdField& U, double gamma);

// Patch max (including the node itself) of a nodal quantity.
std::vector<double> patch_max(const std::vector<double>& nodal, const PatchTable& patches);

// Divergence of the flux at a point, by the chain rule on pointwise values
// and gradients of the conserved components.
std::array<double, n_comp> flux_divergence(const std::array<double, n_comp>& val,
                                           const std::array<Vec2, n_comp>& grad, double gamma);

} // namespace mhdnv
