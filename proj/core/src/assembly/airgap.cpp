#include "igashape/assembly/airgap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "igashape/assembly/field.hpp"
#include "igashape/errors.hpp"
#include "igashape/spline/quadrature.hpp"

namespace igashape {

TargetFlux TargetFlux::constant(double value) {
    TargetFlux t;
    t.a0_ = value;
    return t;
}

TargetFlux TargetFlux::fourier(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
    TargetFlux t;
    t.a0_ = a0;
    t.cos_ = std::move(cos_coeffs);
    t.sin_ = std::move(sin_coeffs);
    return t;
}

TargetFlux TargetFlux::poles(int pole_pairs, double amplitude) {
    if (pole_pairs < 1) throw ConfigurationError("pole pair count must be positive");
    std::vector<double> c(static_cast<std::size_t>(pole_pairs), 0.0);
    c.back() = amplitude;
    return fourier(0.0, std::move(c));
}

TargetFlux TargetFlux::tabulated(std::vector<double> s, std::vector<double> values) {
    if (s.empty() || s.size() != values.size()) {
        throw ConfigurationError("tabulated target needs matching, non-empty s and value lists");
    }
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s[k] > s[k - 1])) throw ConfigurationError("tabulated target: s must be strictly increasing");
    }
    TargetFlux t;
    t.table_s_ = std::move(s);
    t.table_v_ = std::move(values);
    return t;
}

double TargetFlux::operator()(double s, double length) const {
    if (!table_s_.empty()) {
        if (s <= table_s_.front()) return table_v_.front();
        if (s >= table_s_.back()) return table_v_.back();
        const auto it = std::upper_bound(table_s_.begin(), table_s_.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - table_s_.begin());
        const double t = (s - table_s_[k - 1]) / (table_s_[k] - table_s_[k - 1]);
        return (1.0 - t) * table_v_[k - 1] + t * table_v_[k];
    }
    double out = a0_;
    if (length <= 0.0) return out;
    const double w = 2.0 * std::numbers::pi * s / length;
    for (std::size_t k = 0; k < cos_.size(); ++k) out += cos_[k] * std::cos(static_cast<double>(k + 1) * w);
    for (std::size_t k = 0; k < sin_.size(); ++k) out += sin_[k] * std::sin(static_cast<double>(k + 1) * w);
    return out;
}

namespace {

struct CurvePoint {
    Point2 x;
    Point2 dx;  // dC/dt
    std::vector<int> local;
    Eigen::VectorXd dphi_dt;
};

CurvePoint curve_point(const Patch& patch, const AirGapSegment& seg, double t) {
    const auto& basis = patch.basis();
    const bool run_u = seg.fixed_dir == 1;
    const double u = run_u ? t : seg.value;
    const double v = run_u ? seg.value : t;
    const BasisValues bu = eval_basis_derivs(basis.u, u, 1);
    const BasisValues bv = eval_basis_derivs(basis.v, v, 1);
    CurvePoint cp;
    cp.x.setZero();
    cp.dx.setZero();
    const auto nu = bu.values.cols();
    const auto nv = bv.values.cols();
    cp.dphi_dt.resize(nu * nv);
    for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nv; ++b) {
            const int k = basis.index(bu.first + a, bv.first + b);
            const double n = bu.values(0, a) * bv.values(0, b);
            const double d = run_u ? bu.values(1, a) * bv.values(0, b) : bu.values(0, a) * bv.values(1, b);
            const Point2& c = patch.control_points()[k];
            cp.x += n * c;
            cp.dx += d * c;
            cp.dphi_dt(static_cast<Eigen::Index>(cp.local.size())) = d;
            cp.local.push_back(k);
        }
    }
    return cp;
}

double speed(const Patch& patch, const AirGapSegment& seg, double t) { return curve_point(patch, seg, t).dx.norm(); }

}  // namespace

AirGapQuadrature airgap_quadrature(const MultiPatchDomain& domain, QuadratureOrder q) {
    AirGapQuadrature out;
    double s0 = 0.0;
    for (const auto& seg : domain.airgap().segments) {
        const Patch& patch = domain.patch(seg.patch);
        const KnotVector& running = seg.fixed_dir == 1 ? patch.basis().u : patch.basis().v;
        const GaussRule ref = gauss_legendre(q.points(running.degree()));
        const double lo = std::min(seg.from, seg.to);
        const double hi = std::max(seg.from, seg.to);
        const double sigma = seg.to > seg.from ? 1.0 : -1.0;
        std::vector<double> br;
        for (double b : running.breaks()) {
            if (b >= lo && b <= hi) br.push_back(b);
        }
        if (sigma < 0) std::reverse(br.begin(), br.end());
        for (std::size_t k = 0; k + 1 < br.size(); ++k) {
            const double a = br[k];
            const double b = br[k + 1];
            const GaussRule rule = ref.mapped(std::min(a, b), std::max(a, b));
            const std::size_t nq = rule.nodes.size();
            double span_len = 0.0;
            for (std::size_t i = 0; i < nq; ++i) {
                const std::size_t j = sigma > 0 ? i : nq - 1 - i;
                const double t = rule.nodes[j];
                const CurvePoint cp = curve_point(patch, seg, t);
                const double sp = cp.dx.norm();
                if (!(sp > 0.0)) throw GeometryError("degenerate air-gap curve");
                // arc length from the span start to t
                const GaussRule sub = ref.mapped(a, t);
                double partial = 0.0;
                for (std::size_t m = 0; m < sub.nodes.size(); ++m) partial += sub.weights[m] * speed(patch, seg, sub.nodes[m]);
                AirGapSample smp;
                smp.patch = seg.patch;
                smp.local = cp.local;
                smp.dphi_ds = (sigma / sp) * cp.dphi_dt;
                smp.weight = rule.weights[j] * sp;
                smp.s = s0 + std::abs(partial);
                smp.point = cp.x;
                smp.tangent = (sigma / sp) * cp.dx;
                span_len += smp.weight;
                out.samples.push_back(std::move(smp));
            }
            s0 += span_len;
        }
    }
    out.length = s0;
    return out;
}

namespace {

double tangential(const AirGapSample& smp, const Eigen::VectorXd& c) {
    double g = 0.0;
    for (std::size_t k = 0; k < smp.local.size(); ++k) g += smp.dphi_ds(static_cast<Eigen::Index>(k)) * c(smp.local[k]);
    return g;
}

std::vector<Eigen::VectorXd> all_coefficients(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                              const Eigen::VectorXd& u) {
    std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(domain.patch_count()));
    for (const auto& seg : domain.airgap().segments) {
        if (c[seg.patch].size() == 0) c[seg.patch] = patch_coefficients(dof_map, u, seg.patch);
    }
    return c;
}

}  // namespace

AirGapTerms assemble_airgap_terms(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                  const TargetFlux& target, const Eigen::VectorXd& u, QuadratureOrder q) {
    if (u.size() != dof_map.free_count()) throw ContractError("state vector does not match the free dofs");
    const AirGapQuadrature quad = airgap_quadrature(domain, q);
    const auto coeffs = all_coefficients(domain, dof_map, u);
    AirGapTerms out;
    out.adjoint_rhs = Eigen::VectorXd::Zero(dof_map.free_count());
    for (const auto& smp : quad.samples) {
        const double r = tangential(smp, coeffs[smp.patch]) - target(smp.s, quad.length);
        out.objective += smp.weight * r * r;
        const auto& l2g = dof_map.patch_dofs(smp.patch);
        for (std::size_t k = 0; k < smp.local.size(); ++k) {
            const int f = dof_map.free_index(l2g[smp.local[k]]);
            if (f >= 0) out.adjoint_rhs(f) -= 2.0 * smp.weight * r * smp.dphi_ds(static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

std::vector<ProfilePoint> airgap_profile(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                         const TargetFlux& target, const Eigen::VectorXd& u, QuadratureOrder q) {
    const AirGapQuadrature quad = airgap_quadrature(domain, q);
    const auto coeffs = all_coefficients(domain, dof_map, u);
    std::vector<ProfilePoint> out;
    out.reserve(quad.samples.size());
    for (const auto& smp : quad.samples) {
        out.push_back({smp.s, smp.point, tangential(smp, coeffs[smp.patch]), target(smp.s, quad.length)});
    }
    return out;
}

double mean_flux_magnitude(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const Eigen::VectorXd& u,
                           QuadratureOrder q) {
    const AirGapQuadrature quad = airgap_quadrature(domain, q);
    if (quad.length <= 0.0) return 0.0;
    const auto coeffs = all_coefficients(domain, dof_map, u);
    double sum = 0.0;
    for (const auto& smp : quad.samples) sum += smp.weight * std::abs(tangential(smp, coeffs[smp.patch]));
    return sum / quad.length;
}

}  // namespace igashape
