#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace igashape {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the parametric domain of a knot vector or patch.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input document (geometry or run configuration).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Patch sides that partially coincide, or an inconsistent side classification.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Matched interface sides carry different knot vectors.
class ConformityError : public TopologyError {
public:
    using TopologyError::TopologyError;
};

/// Non-positive Jacobian determinant where a valid geometry map is required.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied settings (alpha <= 0, misplaced air-gap segment, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Violated calling contract (mismatched sizes, non-descent direction, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Failure inside a linear solver.
class SolverError : public Error {
public:
    using Error::Error;
};

class FactorizationError : public SolverError {
public:
    using SolverError::SolverError;
};

class ConvergenceError : public SolverError {
public:
    ConvergenceError(const std::string& what, std::vector<double> residual_history)
        : SolverError(what), residuals_(std::move(residual_history)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// Subdomain partition cannot satisfy the connectivity requirement.
class PartitionError : public Error {
public:
    using Error::Error;
};

/// Singular spring-model system.
class SmoothingError : public Error {
public:
    using Error::Error;
};

/// The design violates the Jacobian sign record, or the line search gave up.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

}  // namespace igashape
