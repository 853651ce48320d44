#include "igashape/assembly/element_loop.hpp"

namespace igashape {

namespace {

std::vector<SpanTable> build_tables(const KnotVector& kv, int points) {
    const int p = kv.degree();
    const int nq = points > 0 ? points : p + 1;
    const GaussRule ref = gauss_legendre(nq);
    const auto br = kv.breaks();
    std::vector<SpanTable> out;
    out.reserve(br.size());
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
        const GaussRule rule = ref.mapped(br[s], br[s + 1]);
        SpanTable tab;
        tab.t = rule.nodes;
        tab.w = rule.weights;
        tab.value.resize(nq, p + 1);
        tab.deriv.resize(nq, p + 1);
        for (int q = 0; q < nq; ++q) {
            const BasisValues b = eval_basis_derivs(kv, rule.nodes[q], 1);
            tab.first = b.first;
            tab.value.row(q) = b.values.row(0);
            tab.deriv.row(q) = b.values.row(1);
        }
        out.push_back(std::move(tab));
    }
    return out;
}

}  // namespace

PatchQuadrature::PatchQuadrature(const Patch& patch, int points_u, int points_v)
    : u(build_tables(patch.basis().u, points_u)), v(build_tables(patch.basis().v, points_v)) {}

void compute_element(const Patch& patch, int patch_index, const PatchQuadrature& quad, int su, int sv,
                     ElementValues& out) {
    const SpanTable& tu = quad.u[su];
    const SpanTable& tv = quad.v[sv];
    const int nu = static_cast<int>(tu.value.cols());
    const int nv = static_cast<int>(tv.value.cols());
    const int qu = static_cast<int>(tu.t.size());
    const int qv = static_cast<int>(tv.t.size());
    const int nloc = nu * nv;
    const int nq = qu * qv;
    const auto& basis = patch.basis();
    const auto& cps = patch.control_points();

    out.span_u = su;
    out.span_v = sv;
    out.local.resize(static_cast<std::size_t>(nloc));
    for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nv; ++b) out.local[a * nv + b] = basis.index(tu.first + a, tv.first + b);
    }
    out.N.resize(nq, nloc);
    out.dNdx.resize(nq, nloc);
    out.dNdy.resize(nq, nloc);
    out.weight.resize(nq);
    out.det.resize(nq);
    out.x.resize(nq, 2);

    Eigen::VectorXd du(nloc);
    Eigen::VectorXd dv(nloc);
    for (int i = 0; i < qu; ++i) {
        for (int j = 0; j < qv; ++j) {
            const int q = i * qv + j;
            Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
            Point2 x = Point2::Zero();
            for (int a = 0; a < nu; ++a) {
                for (int b = 0; b < nv; ++b) {
                    const int k = a * nv + b;
                    const double n = tu.value(i, a) * tv.value(j, b);
                    du(k) = tu.deriv(i, a) * tv.value(j, b);
                    dv(k) = tu.value(i, a) * tv.deriv(j, b);
                    out.N(q, k) = n;
                    const Point2& c = cps[out.local[k]];
                    x += n * c;
                    jac.col(0) += du(k) * c;
                    jac.col(1) += dv(k) * c;
                }
            }
            const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
            if (!(det > 0.0)) {
                std::ostringstream msg;
                msg << "non-positive Jacobian determinant " << det << " in patch " << patch_index << " at (u,v) = ("
                    << tu.t[i] << ", " << tv.t[j] << ")";
                throw GeometryError(msg.str());
            }
            // J^{-T} (du, dv)
            const double inv = 1.0 / det;
            for (int k = 0; k < nloc; ++k) {
                out.dNdx(q, k) = inv * (jac(1, 1) * du(k) - jac(1, 0) * dv(k));
                out.dNdy(q, k) = inv * (-jac(0, 1) * du(k) + jac(0, 0) * dv(k));
            }
            out.det(q) = det;
            out.weight(q) = tu.w[i] * tv.w[j] * det;
            out.x.row(q) = x.transpose();
        }
    }
}

Eigen::VectorXd ElementValues::interpolate(const Eigen::VectorXd& patch_coeffs) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(local.size()));
    for (std::size_t k = 0; k < local.size(); ++k) c(static_cast<Eigen::Index>(k)) = patch_coeffs(local[k]);
    return N * c;
}

Eigen::MatrixXd ElementValues::gradient(const Eigen::VectorXd& patch_coeffs) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(local.size()));
    for (std::size_t k = 0; k < local.size(); ++k) c(static_cast<Eigen::Index>(k)) = patch_coeffs(local[k]);
    Eigen::MatrixXd g(N.rows(), 2);
    g.col(0) = dNdx * c;
    g.col(1) = dNdy * c;
    return g;
}

}  // namespace igashape
