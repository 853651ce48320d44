#include "igashape/spline/knot_vector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 0) {
        throw ConfigurationError("knot vector degree must be non-negative");
    }
    const auto n = static_cast<int>(knots_.size());
    if (n < 2 * (degree_ + 1)) {
        std::ostringstream msg;
        msg << "knot vector of degree " << degree_ << " needs at least " << 2 * (degree_ + 1)
            << " knots, got " << n;
        throw ConfigurationError(msg.str());
    }
    if (!std::is_sorted(knots_.begin(), knots_.end())) {
        throw ConfigurationError("knots must be non-decreasing");
    }
    for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != knots_.front() || knots_[n - 1 - i] != knots_.back()) {
            throw ConfigurationError("knot vector must be open (end knots repeated degree+1 times)");
        }
    }
    if (!(knots_.back() > knots_.front())) {
        throw ConfigurationError("knot vector has no nonempty span");
    }
    // no knot value may repeat more than p+1 times
    int run = 1;
    for (int i = 1; i < n; ++i) {
        run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
        if (run > degree_ + 1) {
            throw ConfigurationError("knot multiplicity exceeds degree+1");
        }
    }
}

KnotVector KnotVector::uniform(int degree, int spans, double a, double b) {
    if (spans < 1) {
        throw ConfigurationError("uniform knot vector needs at least one span");
    }
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(spans + 2 * degree + 1));
    for (int i = 0; i < degree; ++i) knots.push_back(a);
    for (int i = 0; i <= spans; ++i) {
        knots.push_back(i == spans ? b : a + (b - a) * static_cast<double>(i) / spans);
    }
    for (int i = 0; i < degree; ++i) knots.push_back(b);
    return KnotVector(degree, std::move(knots));
}

std::vector<double> KnotVector::breaks() const {
    std::vector<double> out;
    out.reserve(knots_.size());
    for (double k : knots_) {
        if (out.empty() || k != out.back()) out.push_back(k);
    }
    return out;
}

int KnotVector::find_span(double x) const {
    if (!(x >= first()) || !(x <= last())) {
        std::ostringstream msg;
        msg << "parameter " << x << " outside knot range [" << first() << ", " << last() << "]";
        throw DomainError(msg.str());
    }
    const int n = size();
    if (x >= knots_[n]) {
        // x == last: the last nonempty span
        return n - 1;
    }
    auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

bool KnotVector::is_break(double x, double tol) const {
    const double scale = std::max(1.0, std::abs(last() - first()));
    return std::any_of(knots_.begin(), knots_.end(),
                       [&](double k) { return std::abs(k - x) <= tol * scale; });
}

std::vector<double> KnotVector::greville() const {
    std::vector<double> g(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
        if (degree_ == 0) {
            g[i] = 0.5 * (knots_[i] + knots_[i + 1]);
            continue;
        }
        double s = 0.0;
        for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
        g[i] = s / degree_;
    }
    return g;
}

std::vector<double> KnotVector::midpoints() const {
    const auto b = breaks();
    std::vector<double> mids;
    mids.reserve(b.size());
    for (std::size_t i = 0; i + 1 < b.size(); ++i) mids.push_back(0.5 * (b[i] + b[i + 1]));
    return mids;
}

KnotVector KnotVector::reversed() const {
    std::vector<double> r(knots_.rbegin(), knots_.rend());
    const double s = first() + last();
    for (double& k : r) k = s - k;
    for (int i = 0; i <= degree_; ++i) {
        r[i] = first();
        r[r.size() - 1 - i] = last();
    }
    return KnotVector(degree_, std::move(r));
}

BasisValues eval_basis(const KnotVector& kv, double x) {
    return eval_basis_derivs(kv, x, 0);
}

// Piegl & Tiller, algorithm A2.3.
BasisValues eval_basis_derivs(const KnotVector& kv, double x, int order) {
    if (order < 0 || order > 2) {
        throw ContractError("basis derivative order must be 0, 1 or 2");
    }
    const int p = kv.degree();
    const int span = kv.find_span(x);
    const auto& U = kv.knots();

    // ndu(j, r): upper triangle holds basis values, lower triangle knot differences
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[span + 1 - j];
        right[j] = U[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    BasisValues out;
    out.first = span - p;
    out.values = Eigen::MatrixXd::Zero(order + 1, p + 1);
    for (int j = 0; j <= p; ++j) out.values(0, j) = ndu(j, p);
    if (order == 0) return out;

    // derivatives above the degree vanish
    const int top = std::min(order, p);
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= top; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out.values(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= top; ++k) {
        out.values.row(k) *= factor;
        factor *= (p - k);
    }
    return out;
}

}  // namespace igashape
