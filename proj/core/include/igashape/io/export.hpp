#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "igashape/assembly/airgap.hpp"
#include "igashape/optimization/optimizer.hpp"

namespace igashape {

/// Columns: dof, x, y, u. One row per global dof with the control point
/// of its first copy; Dirichlet dofs carry u = 0.
void write_coefficients_csv(std::ostream& out, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                            const Eigen::VectorXd& u);

/// Legacy ASCII VTK structured grid of one patch: samples_per_span + 1
/// points per span and direction with point data u and |B|.
void write_patch_vtk(std::ostream& out, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                     const Eigen::VectorXd& u, int patch, int samples_per_span = 4);

/// One file per patch, dir/<stem>_<patch>.vtk. Returns the written paths.
std::vector<std::filesystem::path> write_field_vtk(const std::filesystem::path& dir, const std::string& stem,
                                                   const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                                   const Eigen::VectorXd& u, int samples_per_span = 4);

/// Columns: s, x, y, flux, target.
void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& profile);

/// Columns: iteration, J, step, gradient_norm, shrink_count, feasible.
void write_history_csv(std::ostream& out, const std::vector<IterateRecord>& history);

struct BenchRow {
    long dofs = 0;
    std::string solver;
    int workers = 1;
    double setup_s = 0.0;
    double solve_s = 0.0;
    int iterations = 0;
    double rel_residual = 0.0;
};

/// time_{k-1} / time_k of consecutive rows (setup + solve); empty for the
/// first row.
std::vector<std::optional<double>> bench_rates(const std::vector<BenchRow>& rows);

/// Columns: dofs, solver, workers, setup_s, solve_s, iterations,
/// rel_residual, rate ("--" in the first row).
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Writes `text` to a file, creating parent directories. Throws Error when
/// the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace igashape
