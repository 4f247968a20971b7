#pragma once

#include "mhdnv/geom.hpp"

#include <vector>

namespace mhdnv {

// Points and weights on the unit reference simplex: [0,1] in 1D, the triangle
// (0,0), (1,0), (0,1) in 2D. Weights sum to the reference measure.
struct QuadratureRule {
    int dim = 1;
    int exact_degree = 1; // integrates polynomials of this total degree exactly
    std::vector<Vec2> points;
    std::vector<double> weights;

    int size() const { return int(points.size()); }
};

// Gauss-Legendre nodes and weights on [0, 1]; exact through degree 2n - 1.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Rule exact for polynomials of total degree <= degree. 2D rules come from a
// tensor Gauss rule collapsed onto the triangle, which keeps the construction
// exact for any requested degree.
QuadratureRule simplex_quadrature(int dim, int degree);

} // namespace mhdnv
