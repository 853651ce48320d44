#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "igashape/topology/dof_map.hpp"
#include "igashape/topology/multipatch.hpp"

namespace igashape {

/// Global: every control point that is not Dirichlet and not on a patch
/// carrying the air-gap curve. InterfaceOnly: control points on sides
/// shared by a design patch and an Air patch whose every patch is design or
/// Air (same exclusions); interior points of the affected patches follow by
/// spring smoothing.
enum class DesignMode { Global, InterfaceOnly };

std::string_view design_mode_name(DesignMode mode);
/// "global" or "interface"; throws ConfigurationError otherwise.
DesignMode parse_design_mode(std::string_view name);

struct DesignEntry {
    int global = 0;  // global dof of the control point
    int patch = 0;   // first patch holding it
    int local = 0;   // control-point index in that patch
    int component = 0;
};

/// Linear map from the design vector to control-point displacements.
/// Design entry i < n moves point i in x, entry n + i moves it in y
/// (n = point_count()).
class DesignVariableMap {
public:
    DesignVariableMap() = default;

    /// Throws ConfigurationError when InterfaceOnly finds no design/air
    /// interface point.
    static DesignVariableMap build(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, DesignMode mode);

    DesignMode mode() const noexcept { return mode_; }
    int size() const noexcept { return 2 * point_count(); }
    int point_count() const noexcept { return static_cast<int>(points_.size()); }
    /// Global dofs of the design points, ascending.
    const std::vector<int>& points() const noexcept { return points_; }
    DesignEntry entry(int i) const;

    /// True for global dofs that are not design points.
    const std::vector<bool>& frozen() const noexcept { return frozen_; }

    /// Scalar extension: global dofs x design points. Selection in Global
    /// mode, selection plus spring-smoothed interiors in InterfaceOnly.
    const Eigen::SparseMatrix<double>& extension() const noexcept { return extension_; }

    /// Patches whose control points move for some design vector.
    const std::vector<int>& moving_patches() const noexcept { return moving_; }

    /// E d: displacement field over global dofs, x components first.
    Eigen::VectorXd displacement(const Eigen::VectorXd& design) const;
    /// E^T f for a field over global dofs (x components first).
    Eigen::VectorXd restrict(const Eigen::VectorXd& global_field) const;

private:
    DesignMode mode_ = DesignMode::Global;
    std::vector<int> points_;
    std::vector<DesignEntry> entries_;
    std::vector<bool> frozen_;
    Eigen::SparseMatrix<double> extension_;
    std::vector<int> moving_;
};

/// Control-point net of n_u x n_v points (v fastest) with the interior
/// replaced by the discrete Laplace equilibrium of the fixed boundary ring:
/// each interior point is the average of its four grid neighbours.
/// Throws SmoothingError for a net smaller than 2 x 2 or of the wrong size.
std::vector<Point2> spring_smooth(int n_u, int n_v, const std::vector<Point2>& net);

/// Moves the control points by step * E * direction. The result shares
/// topology with `domain`; feasibility is not checked.
MultiPatchDomain apply_design_update(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                     const DesignVariableMap& map, const Eigen::VectorXd& direction, double step);

}  // namespace igashape
