#pragma once

#include <vector>

namespace igashape {

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Nodes and weights mapped to [a, b].
    GaussRule mapped(double a, double b) const;
};

GaussRule gauss_legendre(int n);

}  // namespace igashape
