#include "igashape/spline/patch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

std::string_view side_name(Side s) {
    switch (s) {
        case Side::West: return "west";
        case Side::East: return "east";
        case Side::South: return "south";
        case Side::North: return "north";
    }
    return "?";
}

Side parse_side(std::string_view name) {
    for (Side s : kAllSides) {
        if (side_name(s) == name) return s;
    }
    throw ParseError("unknown patch side '" + std::string(name) + "'");
}

Patch::Patch(TensorBasis2D basis, std::vector<Point2> control_points)
    : basis_(std::move(basis)), cps_(std::move(control_points)) {
    if (static_cast<int>(cps_.size()) != basis_.size()) {
        std::ostringstream msg;
        msg << "patch has " << cps_.size() << " control points but basis size " << basis_.size();
        throw ConfigurationError(msg.str());
    }
}

std::vector<int> Patch::side_indices(Side s) const {
    const int nu = basis_.size_u();
    const int nv = basis_.size_v();
    std::vector<int> idx;
    switch (s) {
        case Side::West:
            for (int j = 0; j < nv; ++j) idx.push_back(basis_.index(0, j));
            break;
        case Side::East:
            for (int j = 0; j < nv; ++j) idx.push_back(basis_.index(nu - 1, j));
            break;
        case Side::South:
            for (int i = 0; i < nu; ++i) idx.push_back(basis_.index(i, 0));
            break;
        case Side::North:
            for (int i = 0; i < nu; ++i) idx.push_back(basis_.index(i, nv - 1));
            break;
    }
    return idx;
}

std::vector<int> Patch::interior_indices() const {
    std::vector<int> idx;
    for (int i = 1; i + 1 < basis_.size_u(); ++i) {
        for (int j = 1; j + 1 < basis_.size_v(); ++j) idx.push_back(basis_.index(i, j));
    }
    return idx;
}

const KnotVector& Patch::side_knots(Side s) const {
    return (s == Side::West || s == Side::East) ? basis_.v : basis_.u;
}

std::pair<Point2, Point2> Patch::bounding_box() const {
    Point2 lo = cps_.front();
    Point2 hi = cps_.front();
    for (const auto& c : cps_) {
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    return {lo, hi};
}

double Patch::bounding_box_area() const {
    const auto [lo, hi] = bounding_box();
    return (hi - lo).prod();
}

double Patch::bounding_box_diameter() const {
    const auto [lo, hi] = bounding_box();
    return (hi - lo).norm();
}

namespace {

// Inserts knot x once into (knots, points) for a curve of degree p.
void insert_knot(int p, std::vector<double>& knots, std::vector<Point2>& pts, double x) {
    const KnotVector kv(p, knots);
    const int k = kv.find_span(x);
    std::vector<Point2> out(pts.size() + 1);
    for (int i = 0; i <= k - p; ++i) out[i] = pts[i];
    for (int i = k; i < static_cast<int>(pts.size()); ++i) out[i + 1] = pts[i];
    for (int i = k - p + 1; i <= k; ++i) {
        const double alpha = (x - knots[i]) / (knots[i + p] - knots[i]);
        out[i] = alpha * pts[i] + (1.0 - alpha) * pts[i - 1];
    }
    knots.insert(knots.begin() + k + 1, x);
    pts = std::move(out);
}

std::vector<double> refine_lines(const KnotVector& kv, std::vector<std::vector<Point2>>& lines) {
    std::vector<double> knots;
    for (auto& line : lines) {
        knots = kv.knots();
        for (double m : kv.midpoints()) insert_knot(kv.degree(), knots, line, m);
    }
    return knots;
}

}  // namespace

Patch Patch::refined() const {
    const int nu = basis_.size_u();
    const int nv = basis_.size_v();

    // refine along u: one line per v index
    std::vector<std::vector<Point2>> rows(static_cast<std::size_t>(nv));
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) rows[j].push_back(control_point(i, j));
    }
    KnotVector ku(degree_u(), refine_lines(basis_.u, rows));
    const int nu2 = ku.size();

    std::vector<std::vector<Point2>> cols(static_cast<std::size_t>(nu2));
    for (int i = 0; i < nu2; ++i) {
        for (int j = 0; j < nv; ++j) cols[i].push_back(rows[j][i]);
    }
    KnotVector kv(degree_v(), refine_lines(basis_.v, cols));
    const int nv2 = kv.size();

    std::vector<Point2> cps(static_cast<std::size_t>(nu2 * nv2));
    for (int i = 0; i < nu2; ++i) {
        for (int j = 0; j < nv2; ++j) cps[i * nv2 + j] = cols[i][j];
    }
    return Patch(TensorBasis2D{std::move(ku), std::move(kv)}, std::move(cps));
}

GeometryPoint geometry_eval(const Patch& patch, double u, double v) {
    const auto& basis = patch.basis();
    const BasisValues bu = eval_basis_derivs(basis.u, u, 1);
    const BasisValues bv = eval_basis_derivs(basis.v, v, 1);

    GeometryPoint out;
    out.point.setZero();
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    for (int a = 0; a < bu.values.cols(); ++a) {
        for (int b = 0; b < bv.values.cols(); ++b) {
            const Point2& c = patch.control_point(bu.first + a, bv.first + b);
            out.point += bu.values(0, a) * bv.values(0, b) * c;
            jac.col(0) += bu.values(1, a) * bv.values(0, b) * c;
            jac.col(1) += bu.values(0, a) * bv.values(1, b) * c;
        }
    }
    out.jacobian.parametric_point = {u, v};
    out.jacobian.jacobian = jac;
    out.jacobian.det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    return out;
}

std::string_view sign_name(JacobianSign s) {
    switch (s) {
        case JacobianSign::AllPositive: return "positive";
        case JacobianSign::AllNegative: return "negative";
        case JacobianSign::Mixed: return "mixed";
    }
    return "?";
}

namespace {

std::vector<double> sample_params(const KnotVector& kv, int per_span) {
    const auto br = kv.breaks();
    std::vector<double> out;
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
        for (int k = 0; k < per_span; ++k) {
            const double t = per_span == 1 ? 0.5 : static_cast<double>(k) / (per_span - 1);
            out.push_back(k == per_span - 1 && per_span > 1 ? br[s + 1] : br[s] + t * (br[s + 1] - br[s]));
        }
    }
    return out;
}

}  // namespace

JacobianSign jacobian_sign_certificate(const Patch& patch, int samples_per_span) {
    const double tol = 1e-12 * patch.bounding_box_area();
    bool pos = false;
    bool neg = false;
    for (double u : sample_params(patch.basis().u, samples_per_span)) {
        for (double v : sample_params(patch.basis().v, samples_per_span)) {
            const double det = geometry_eval(patch, u, v).jacobian.det;
            if (std::abs(det) <= tol) return JacobianSign::Mixed;
            (det > 0 ? pos : neg) = true;
            if (pos && neg) return JacobianSign::Mixed;
        }
    }
    return pos ? JacobianSign::AllPositive : JacobianSign::AllNegative;
}

JacobianSign jacobian_sign_certificate(const Patch& patch) {
    return jacobian_sign_certificate(patch, std::max(patch.degree_u(), patch.degree_v()) + 1);
}

}  // namespace igashape
