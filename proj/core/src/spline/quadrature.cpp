#include "igashape/spline/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "igashape/errors.hpp"

namespace igashape {

GaussRule GaussRule::mapped(double a, double b) const {
    GaussRule out;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    out.nodes.reserve(nodes.size());
    out.weights.reserve(weights.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out.nodes.push_back(mid + half * nodes[i]);
        out.weights.push_back(half * weights[i]);
    }
    return out;
}

namespace {

// (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussRule gauss_legendre(int n) {
    if (n < 1) throw ContractError("Gauss rule needs at least one point");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace igashape
