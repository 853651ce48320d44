#pragma once

// Small hand-built geometries shared by the unit tests.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "igashape/spline/patch.hpp"
#include "igashape/topology/dof_map.hpp"
#include "igashape/topology/multipatch.hpp"

namespace igashape::fixtures {

inline Patch square_patch(int degree, int spans, double x0 = 0.0, double y0 = 0.0, double size = 1.0) {
    TensorBasis2D basis{KnotVector::uniform(degree, spans), KnotVector::uniform(degree, spans)};
    return Patch::from_greville(basis, [&](double u, double v) { return Point2(x0 + size * u, y0 + size * v); });
}

inline Patch identity_patch(int degree = 1, int spans = 1) { return square_patch(degree, spans); }

/// u runs radially, v counterclockwise; the arc interpolates cos/sin at the
/// Greville points.
inline Patch quarter_annulus(int degree, int spans, double r0, double r1) {
    const KnotVector ku = KnotVector::uniform(degree, spans);
    const KnotVector kv = KnotVector::uniform(degree, spans);
    const auto g = ku.greville();
    const int n = ku.size();
    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs(n, 2);
    for (int i = 0; i < n; ++i) {
        const BasisValues b = eval_basis(ku, g[i]);
        for (int j = 0; j < b.values.cols(); ++j) colloc(i, b.first + j) = b.values(0, j);
        const double th = 0.5 * std::numbers::pi * g[i];
        rhs(i, 0) = std::cos(th);
        rhs(i, 1) = std::sin(th);
    }
    const Eigen::MatrixXd arc = colloc.partialPivLu().solve(rhs);
    std::vector<Point2> cps;
    for (double u : kv.greville()) {
        for (int j = 0; j < n; ++j) cps.push_back((r0 + (r1 - r0) * u) * Point2(arc(j, 0), arc(j, 1)));
    }
    return Patch(TensorBasis2D{kv, ku}, std::move(cps));
}

/// All sides Dirichlet.
inline std::vector<SideRef> all_sides(int patch) {
    return {{patch, Side::West}, {patch, Side::East}, {patch, Side::South}, {patch, Side::North}};
}

inline std::vector<MaterialTag> uniform_materials(int n, double nu = 1.0) {
    return std::vector<MaterialTag>(static_cast<std::size_t>(n), MaterialTag{MaterialKind::Air, nu, std::nullopt});
}

/// nx x ny grid of square patches covering [0,nx*size] x [0,ny*size], exterior sides Dirichlet.
inline MultiPatchDomain grid_domain(int nx, int ny, int degree, int spans, double size = 1.0,
                                    bool dirichlet = true, double nu = 1.0) {
    std::vector<Patch> patches;
    std::vector<SideRef> dir;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int id = static_cast<int>(patches.size());
            patches.push_back(square_patch(degree, spans, i * size, j * size, size));
            if (!dirichlet) continue;
            if (i == 0) dir.push_back({id, Side::West});
            if (i == nx - 1) dir.push_back({id, Side::East});
            if (j == 0) dir.push_back({id, Side::South});
            if (j == ny - 1) dir.push_back({id, Side::North});
        }
    }
    return build_topology(std::move(patches), uniform_materials(nx * ny, nu), std::move(dir));
}

}  // namespace igashape::fixtures
