#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "igashape/spline/knot_vector.hpp"

namespace igashape {

using Point2 = Eigen::Vector2d;

/// Patch sides of the reference square. West: u = 0, East: u = 1,
/// South: v = 0, North: v = 1.
enum class Side { West = 0, East = 1, South = 2, North = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::West, Side::East, Side::South, Side::North};

std::string_view side_name(Side s);
Side parse_side(std::string_view name);

/// Tensor product of two univariate bases.
struct TensorBasis2D {
    KnotVector u;
    KnotVector v;

    int size_u() const { return u.size(); }
    int size_v() const { return v.size(); }
    int size() const { return u.size() * v.size(); }

    /// Row-major (u, v) index: v varies fastest.
    int index(int iu, int iv) const { return iu * v.size() + iv; }
};

struct JacobianSample {
    Eigen::Vector2d parametric_point;
    Eigen::Matrix2d jacobian;  // columns: dG/du, dG/dv
    double det = 0.0;
};

struct GeometryPoint {
    Point2 point;
    JacobianSample jacobian;
};

/// Tensor-product B-spline map G: [u0,u1] x [v0,v1] -> R^2.
class Patch {
public:
    Patch() = default;
    Patch(TensorBasis2D basis, std::vector<Point2> control_points);

    /// Degree-(pu,pv) patch whose control points are the images of the
    /// Greville abscissae under `map`; reproduces affine maps exactly.
    template <class Map>
    static Patch from_greville(TensorBasis2D basis, Map&& map) {
        const auto gu = basis.u.greville();
        const auto gv = basis.v.greville();
        std::vector<Point2> cps;
        cps.reserve(static_cast<std::size_t>(basis.size()));
        for (double a : gu) {
            for (double b : gv) cps.push_back(map(a, b));
        }
        return Patch(std::move(basis), std::move(cps));
    }

    const TensorBasis2D& basis() const noexcept { return basis_; }
    int degree_u() const noexcept { return basis_.u.degree(); }
    int degree_v() const noexcept { return basis_.v.degree(); }

    const std::vector<Point2>& control_points() const noexcept { return cps_; }
    std::vector<Point2>& control_points() noexcept { return cps_; }
    const Point2& control_point(int iu, int iv) const { return cps_[basis_.index(iu, iv)]; }

    /// Local control-point indices along a side, ordered by increasing
    /// parameter along that side.
    std::vector<int> side_indices(Side s) const;

    /// Indices of control points not on any side.
    std::vector<int> interior_indices() const;

    /// Knot vector running along a side.
    const KnotVector& side_knots(Side s) const;

    /// Axis-aligned bounding box of the control net.
    std::pair<Point2, Point2> bounding_box() const;
    double bounding_box_area() const;
    double bounding_box_diameter() const;

    /// Uniform h-refinement: every nonempty span is split in half, by Boehm
    /// knot insertion, so the geometry map is unchanged.
    Patch refined() const;

private:
    TensorBasis2D basis_;
    std::vector<Point2> cps_;
};

/// G(u,v) and its Jacobian. Throws DomainError for parameters outside the
/// parametric square.
GeometryPoint geometry_eval(const Patch& patch, double u, double v);

enum class JacobianSign { AllPositive, AllNegative, Mixed };

std::string_view sign_name(JacobianSign s);

/// Samples det(DG) on a grid with `samples_per_span` equally spaced points
/// per knot span and direction (span ends included). |det| below
/// 1e-12 * bounding-box area counts as Mixed.
JacobianSign jacobian_sign_certificate(const Patch& patch, int samples_per_span);

/// Default density: degree + 1 samples per span, the largest of the two
/// directions.
JacobianSign jacobian_sign_certificate(const Patch& patch);

}  // namespace igashape
