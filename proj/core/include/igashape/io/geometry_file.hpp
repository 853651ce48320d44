#pragma once

#include <filesystem>
#include <string>

#include "igashape/topology/multipatch.hpp"

namespace igashape {

inline constexpr int kGeometryFileVersion = 1;

/// Parses a geometry document (JSON). Throws ParseError naming the line and
/// column of a syntax error, or the field path of a missing or ill-typed
/// entry; topology and configuration errors of build_topology propagate.
MultiPatchDomain parse_geometry(const std::string& text);

/// Reads and parses a geometry file. Throws ParseError when it cannot be read.
MultiPatchDomain read_geometry(const std::filesystem::path& path);

/// Serializes a domain. Numbers are written with round-trip precision.
std::string format_geometry(const MultiPatchDomain& domain);

void write_geometry(const std::filesystem::path& path, const MultiPatchDomain& domain);

}  // namespace igashape
