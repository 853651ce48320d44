#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace igashape {

/// Open (clamped) knot vector of a univariate B-spline basis.
class KnotVector {
public:
    KnotVector() = default;

    /// Throws ConfigurationError unless the knots are non-decreasing, open
    /// (end knots repeated degree+1 times) and span a nonempty interval.
    KnotVector(int degree, std::vector<double> knots);

    /// Open knot vector on [a,b] with `spans` equal knot spans.
    static KnotVector uniform(int degree, int spans, double a = 0.0, double b = 1.0);

    int degree() const noexcept { return degree_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// Number of basis functions.
    int size() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }

    double first() const noexcept { return knots_.front(); }
    double last() const noexcept { return knots_.back(); }

    /// Distinct knot values (span boundaries), ascending.
    std::vector<double> breaks() const;
    int span_count() const { return static_cast<int>(breaks().size()) - 1; }

    /// Knot index i with knots[i] <= x < knots[i+1]; x == last() maps to the
    /// last nonempty span. Throws DomainError outside [first, last].
    int find_span(double x) const;

    bool is_break(double x, double tol = 1e-14) const;

    std::vector<double> greville() const;

    /// Inserts the midpoint of every nonempty span.
    std::vector<double> midpoints() const;

    /// Reverses the parameterization: knot t maps to first + last - t.
    KnotVector reversed() const;

    bool operator==(const KnotVector& other) const = default;

private:
    int degree_ = 0;
    std::vector<double> knots_;
};

/// Nonzero basis functions (and derivatives) at one parameter value.
/// values(k, j) is the k-th derivative of basis function first + j.
struct BasisValues {
    int first = 0;
    Eigen::MatrixXd values;
};

/// Cox-de Boor evaluation of the p+1 nonzero basis functions at x.
BasisValues eval_basis(const KnotVector& kv, double x);

/// Values and derivatives up to `order` (0, 1 or 2).
BasisValues eval_basis_derivs(const KnotVector& kv, double x, int order);

}  // namespace igashape
