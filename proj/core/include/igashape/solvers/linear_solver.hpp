#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "igashape/assembly/forms.hpp"
#include "igashape/solvers/ieti_dp.hpp"
#include "igashape/solvers/solve_log.hpp"
#include "igashape/solvers/sparse_ldlt.hpp"
#include "igashape/solvers/worker_pool.hpp"

namespace igashape {

enum class SolverKind { Direct, Ieti };

std::string_view solver_name(SolverKind kind);
/// "direct" or "ieti"; throws ConfigurationError otherwise.
SolverKind parse_solver(std::string_view name);

struct SolverOptions {
    SolverKind kind = SolverKind::Direct;
    double tol = 1e-8;
    int max_iterations = 1000;
    int workers = 1;
    /// IETI-DP subdomains; 0 means one per patch.
    int subdomains = 0;
    IetiScaling scaling = IetiScaling::Coefficient;
};

/// Factorizes (or sets up IETI-DP for) one system and then solves any
/// number of right-hand sides with it. `system` must outlive the solver.
class SystemSolver {
public:
    SystemSolver(const SparseSymmetricSystem& system, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                 const SolverOptions& options);
    ~SystemSolver();
    SystemSolver(SystemSolver&&) noexcept;

    SolveResult solve(const Eigen::VectorXd& rhs) const;

    SolverKind kind() const noexcept { return options_.kind; }
    double setup_seconds() const noexcept { return setup_seconds_; }
    std::size_t memory_bytes() const;
    /// nullptr for the direct solver.
    const IetiDpOperator* ieti() const noexcept { return ieti_.get(); }

private:
    const SparseSymmetricSystem* system_;
    SolverOptions options_;
    double setup_seconds_ = 0.0;
    std::unique_ptr<SparseLdlt> direct_;
    std::unique_ptr<WorkerPool> pool_;
    std::unique_ptr<IetiDpOperator> ieti_;
};

}  // namespace igashape
