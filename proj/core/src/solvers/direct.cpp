#include "igashape/solvers/direct.hpp"

#include "igashape/errors.hpp"

namespace igashape {

double relative_residual(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const double nb = b.norm();
    const double nr = (a * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

SolveResult direct_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
    if (a.rows() != b.size()) throw ContractError("right-hand side size does not match the matrix");
    SolveResult out;
    Stopwatch factor;
    const SparseLdlt ldlt(a);
    out.log.factor_seconds = factor.seconds();
    out.log.setup_seconds = out.log.factor_seconds;
    Stopwatch solve;
    out.x = ldlt.solve(b);
    out.log.solve_seconds = solve.seconds();
    out.log.memory_bytes = ldlt.memory_bytes();
    out.log.relative_residual = relative_residual(a, out.x, b);
    return out;
}

}  // namespace igashape
