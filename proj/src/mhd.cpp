#include "mhdnv/mhd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mhdnv {

double internal_energy(const MhdState& s) {
    if (!(s.rho > 0.0))
        throw std::domain_error("mhd: non-positive density");
    return s.E - 0.5 * dot(s.m, s.m) / s.rho - 0.5 * dot(s.B, s.B);
}

double pressure(const MhdState& s, double gamma) { return (gamma - 1.0) * internal_energy(s); }

MhdState conserved_state(double rho, Vec2 u, double p, Vec2 B, double gamma) {
    MhdState s;
    s.rho = rho;
    s.m = u * rho;
    s.B = B;
    s.E = p / (gamma - 1.0) + 0.5 * rho * dot(u, u) + 0.5 * dot(B, B);
    return s;
}

bool state_valid(const MhdState& s) {
    if (!(s.rho > 0.0))
        return false;
    const double e = s.E - 0.5 * dot(s.m, s.m) / s.rho - 0.5 * dot(s.B, s.B);
    return std::isfinite(s.rho) && std::isfinite(s.m.x) && std::isfinite(s.m.y) &&
           std::isfinite(s.E) && std::isfinite(s.B.x) && std::isfinite(s.B.y) && e > 0.0;
}

std::array<Vec2, n_comp> mhd_flux(const MhdState& s, double gamma) {
    const double p = pressure(s, gamma);
    const Vec2 u = s.m * (1.0 / s.rho);
    const double ptot = p + 0.5 * dot(s.B, s.B); // gas + magnetic pressure
    std::array<Vec2, n_comp> F;
    F[comp_rho] = s.m;
    F[comp_mx] = u * s.m.x + Vec2{ptot, 0.0} - s.B * s.B.x;
    F[comp_my] = u * s.m.y + Vec2{0.0, ptot} - s.B * s.B.y;
    F[comp_energy] = u * (s.E + ptot) - s.B * dot(u, s.B);
    F[comp_bx] = u * s.B.x - s.B * u.x;
    F[comp_by] = u * s.B.y - s.B * u.y;
    return F;
}

WaveSpeeds wave_speeds(const MhdState& s, double gamma, Vec2 e) {
    const double p = pressure(s, gamma);
    if (!(p > 0.0))
        throw std::domain_error("mhd: non-positive pressure");
    WaveSpeeds w;
    const double a2 = gamma * p / s.rho;
    const double b = dot(s.B, e) / std::sqrt(s.rho);
    const double q = a2 + dot(s.B, s.B) / s.rho;
    const double disc = std::sqrt(std::max(q * q - 4.0 * a2 * b * b, 0.0));
    w.sound = std::sqrt(a2);
    w.alfven = std::abs(b);
    w.fast = std::sqrt(0.5 * (q + disc));
    w.slow = std::sqrt(std::max(0.5 * (q - disc), 0.0));
    const double un = dot(s.m, e) / s.rho;
    w.eigenvalues = {un - w.fast, un - w.alfven, un - w.slow, un,
                     un,          un + w.slow,   un + w.alfven, un + w.fast};
    return w;
}

double fast_speed(const MhdState& s, double gamma, Vec2 e) {
    return wave_speeds(s, gamma, e).fast;
}

double wave_speed_bound(const MhdState& s, double gamma) {
    const double p = pressure(s, gamma);
    if (!(p > 0.0))
        throw std::domain_error("mhd: non-positive pressure");
    const double a2 = gamma * p / s.rho;
    return norm(s.m) / s.rho + std::sqrt(a2 + dot(s.B, s.B) / s.rho);
}

std::vector<double> nodal_wave_bound(const MhdField& U, double gamma) {
    std::vector<double> v(U.n);
    for (int i = 0; i < U.n; ++i) {
        const MhdState s = U.state(i);
        if (!state_valid(s))
            throw std::runtime_error("mhd: invalid state at node " + std::to_string(i));
        v[i] = wave_speed_bound(s, gamma);
    }
    return v;
}

std::vector<double> patch_max(const std::vector<double>& nodal, const PatchTable& patches) {
    const int n = static_cast<int>(nodal.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double m = nodal[i];
        for (int j : patches.node_nodes[i])
            m = std::max(m, nodal[j]);
        out[i] = m;
    }
    return out;
}

std::array<double, n_comp> flux_divergence(const std::array<double, n_comp>& val,
                                           const std::array<Vec2, n_comp>& grad, double gamma) {
    const double rho = val[comp_rho];
    if (!(rho > 0.0))
        throw std::domain_error("mhd: non-positive density");
    const Vec2 m{val[comp_mx], val[comp_my]};
    const Vec2 B{val[comp_bx], val[comp_by]};
    const Vec2 u = m * (1.0 / rho);

    const Vec2 g_rho = grad[comp_rho];
    const Vec2 g_mx = grad[comp_mx];
    const Vec2 g_my = grad[comp_my];
    const Vec2 g_E = grad[comp_energy];
    const Vec2 g_bx = grad[comp_bx];
    const Vec2 g_by = grad[comp_by];

    const Vec2 g_ux = (g_mx - g_rho * u.x) * (1.0 / rho);
    const Vec2 g_uy = (g_my - g_rho * u.y) * (1.0 / rho);
    const double div_u = g_ux.x + g_uy.y;
    const double div_m = g_mx.x + g_my.y;
    const double div_B = g_bx.x + g_by.y;

    // grad of |m|^2/(2 rho) and of |B|^2/2
    const Vec2 g_kin = (g_mx * m.x + g_my * m.y) * (1.0 / rho) - g_rho * (0.5 * dot(m, m) / (rho * rho));
    const Vec2 g_mag = g_bx * B.x + g_by * B.y;
    const Vec2 g_p = (g_E - g_kin - g_mag) * (gamma - 1.0);

    const double p = (gamma - 1.0) * (val[comp_energy] - 0.5 * dot(m, m) / rho - 0.5 * dot(B, B));
    const double H = val[comp_energy] + p + 0.5 * dot(B, B);
    const Vec2 g_H = g_E + g_p + g_mag;
    const Vec2 g_uB = g_ux * B.x + g_uy * B.y + g_bx * u.x + g_by * u.y; // grad(u.B)

    std::array<double, n_comp> d;
    d[comp_rho] = div_m;
    d[comp_mx] = dot(u, g_mx) + m.x * div_u + g_p.x + g_mag.x - dot(B, g_bx) - B.x * div_B;
    d[comp_my] = dot(u, g_my) + m.y * div_u + g_p.y + g_mag.y - dot(B, g_by) - B.y * div_B;
    d[comp_energy] = H * div_u + dot(u, g_H) - dot(u, B) * div_B - dot(B, g_uB);
    d[comp_bx] = dot(u, g_bx) + B.x * div_u - dot(B, g_ux) - u.x * div_B;
    d[comp_by] = dot(u, g_by) + B.y * div_u - dot(B, g_uy) - u.y * div_B;
    return d;
}

} // namespace mhdnv
