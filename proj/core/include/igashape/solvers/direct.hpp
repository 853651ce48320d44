#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "igashape/solvers/solve_log.hpp"
#include "igashape/solvers/sparse_ldlt.hpp"

namespace igashape {

/// Factorizes and solves A x = b with SparseLdlt (AMD ordering). The log
/// carries factor/solve times, the factor memory, and ||Ax-b||/||b||.
/// Throws FactorizationError for matrices that are not numerically SPD.
SolveResult direct_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b);

/// ||A x - b|| / ||b|| (or ||A x|| when b = 0).
double relative_residual(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

}  // namespace igashape
