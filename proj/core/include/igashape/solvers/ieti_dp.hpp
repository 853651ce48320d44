#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "igashape/assembly/forms.hpp"
#include "igashape/solvers/partition.hpp"
#include "igashape/solvers/solve_log.hpp"
#include "igashape/solvers/sparse_ldlt.hpp"
#include "igashape/solvers/worker_pool.hpp"

namespace igashape {

/// Weights of the scaled jump operator in the Dirichlet preconditioner.
/// Multiplicity: 1/2 on every dual dof. Coefficient: the neighbour's
/// diagonal stiffness over the sum of both, which follows jumps in nu.
enum class IetiScaling { Multiplicity, Coefficient };

struct IetiOptions {
    IetiScaling scaling = IetiScaling::Multiplicity;
    double tol = 1e-8;
    int max_iterations = 1000;
};

/// Dual-primal tearing and interconnecting operator built from the patch
/// blocks of an assembled system and a patch partition.
///
/// Primal dofs: patch corners on the subdomain interface that are shared by
/// three or more subdomains or end a subdomain interface (the number of
/// cut patch interfaces meeting there is not 2). Subdomains without
/// Dirichlet dofs and without such corners get all their interface corners
/// as primal dofs. Every other interface dof is dual and shared by exactly
/// two subdomains; the jump operator has one row per dual dof with +1 on the
/// lower and -1 on the higher subdomain.
class IetiDpOperator {
public:
    /// `system` must outlive the operator (its global matrix is used for
    /// residual checks). Throws SolverError when a local or the coarse
    /// problem is singular, PartitionError for an invalid partition.
    IetiDpOperator(const SparseSymmetricSystem& system, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                   const Partition& partition, IetiScaling scaling = IetiScaling::Multiplicity,
                   WorkerPool* pool = nullptr);
    ~IetiDpOperator();
    IetiDpOperator(IetiDpOperator&&) noexcept;

    int subdomain_count() const;
    int size() const;
    /// Free-dof indices of the primal and dual dofs.
    const std::vector<int>& primal_dofs() const;
    const std::vector<int>& dual_dofs() const;
    /// Subdomain pair (lower, higher) of each dual dof.
    const std::vector<std::pair<int, int>>& dual_pairs() const;

    double setup_seconds() const;
    std::size_t memory_bytes() const;

    /// Called after every PCG step with the iteration number and multipliers.
    using IterateObserver = std::function<void(int, const Eigen::VectorXd&)>;

    /// PCG on the dual system. pool == nullptr runs on the calling thread.
    /// Stops when the true dual residual |d - F lambda| / |d| and the global
    /// residual |A x - b| / |b| are both <= tol, or when the dual residual is
    /// <= tol and the global one stops halving between checks (its rounding
    /// floor). The recursive residual is replaced by the true one at each
    /// check.
    /// Throws ConvergenceError (with residual history) after max_iterations
    /// and SolverError when r^T z <= 0.
    SolveResult solve(const Eigen::VectorXd& rhs, double tol, int max_iterations, WorkerPool* pool = nullptr,
                      const IterateObserver& observer = {}) const;

    /// F lambda = B K~^{-1} B^T lambda.
    Eigen::VectorXd apply_dual(const Eigen::VectorXd& lambda) const;

    /// K~^{-1} applied to a global right-hand side, then averaged onto the
    /// free dofs: the solution for lambda = 0.
    Eigen::VectorXd solve_without_multipliers(const Eigen::VectorXd& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot helpers.
IetiDpOperator ieti_setup(const SparseSymmetricSystem& system, const MultiPatchDomain& domain,
                          const GlobalDofMap& dof_map, const Partition& partition,
                          IetiScaling scaling = IetiScaling::Multiplicity);
SolveResult ieti_solve(const IetiDpOperator& op, const Eigen::VectorXd& rhs, double tol, int max_iterations);
SolveResult solve_parallel(const IetiDpOperator& op, const Eigen::VectorXd& rhs, double tol, int n_workers,
                           int max_iterations = 1000);

}  // namespace igashape
