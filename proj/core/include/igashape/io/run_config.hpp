#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "igashape/optimization/optimizer.hpp"

namespace igashape {

/// How B_d is chosen.
struct TargetSpec {
    enum class Kind { MatchedPoles, Poles, Constant, Fourier, Table };
    Kind kind = Kind::MatchedPoles;
    int pole_pairs = 2;
    double amplitude = 0.0;  // Poles
    double value = 0.0;      // Constant; Fourier mean
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
    std::vector<double> table_s;
    std::vector<double> table_values;

    /// MatchedPoles needs the state on the initial geometry, see
    /// matched_pole_target(); every other kind ignores `matched_amplitude`.
    TargetFlux resolve(double matched_amplitude) const;
};

/// Everything besides the geometry that defines a run.
struct RunConfig {
    SolverOptions solver;
    QuadratureOrder quadrature;
    OptimizerConfig optimizer;
    TargetSpec target;
    /// Empty: default_alpha; one entry: the same value on every patch;
    /// otherwise one value per patch.
    std::vector<double> alpha;
    std::map<int, double> current_density;  // J3 per patch, zero elsewhere
    /// Adds the source 2 pi^2 sin(pi x) sin(pi y) and reports the L2 error
    /// against sin(pi x) sin(pi y) (meaningful for reluctivity 1).
    bool manufactured = false;
    /// bench right-hand side: "load" (assembled) or "random" (seeded).
    std::string bench_rhs = "random";
    int bench_repeats = 3;
    std::filesystem::path output = "out";
    bool deterministic = false;
    std::uint64_t seed = 0;

    /// Throws ConfigurationError for out-of-range values.
    void validate() const;
    /// Per-patch alpha for a domain; empty when the default applies.
    /// Throws ConfigurationError when the count does not match.
    std::vector<double> alpha_for(int patch_count) const;
    SourceSpec source_for(int patch_count) const;
};

/// Parses a run configuration (JSON). Relative file references resolve
/// against `base_dir`. Missing fields keep their defaults. Throws ParseError
/// for syntax errors, unknown fields and ill-typed values (with the field
/// path), ConfigurationError for invalid values or missing files.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");

RunConfig read_run_config(const std::filesystem::path& path);

}  // namespace igashape
