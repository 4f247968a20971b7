#include "mhdnv/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace mhdnv {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1)
        throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
    nodes.resize(n);
    weights.resize(n);
    // Newton iteration for the roots of the Legendre polynomial on [-1, 1].
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

QuadratureRule simplex_quadrature(int dim, int degree) {
    if (degree < 0)
        degree = 0;
    QuadratureRule rule;
    rule.dim = dim;
    rule.exact_degree = degree;
    std::vector<double> gx, gw;
    if (dim == 1) {
        const int n = degree / 2 + 1; // 2n - 1 >= degree
        gauss_legendre_01(n, gx, gw);
        for (int i = 0; i < n; ++i) {
            rule.points.push_back({gx[i], 0.0});
            rule.weights.push_back(gw[i]);
        }
        return rule;
    }
    if (dim != 2)
        throw std::invalid_argument("simplex_quadrature: dim must be 1 or 2");
    // Collapsed square: (s, t) -> (s (1 - t), t) with Jacobian (1 - t).
    // A monomial of total degree p picks up degree p + 1 in t, so the
    // one-dimensional rule must be exact through degree + 1.
    const int n = (degree + 1) / 2 + 1; // 2n - 1 >= degree + 1
    gauss_legendre_01(n, gx, gw);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double s = gx[i], t = gx[j];
            rule.points.push_back({s * (1.0 - t), t});
            rule.weights.push_back(gw[i] * gw[j] * (1.0 - t));
        }
    return rule;
}

} // namespace mhdnv
