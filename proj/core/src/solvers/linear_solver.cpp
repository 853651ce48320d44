#include "igashape/solvers/linear_solver.hpp"

#include "igashape/errors.hpp"
#include "igashape/solvers/direct.hpp"
#include "igashape/solvers/partition.hpp"

namespace igashape {

std::string_view solver_name(SolverKind kind) { return kind == SolverKind::Direct ? "direct" : "ieti"; }

SolverKind parse_solver(std::string_view name) {
    if (name == "direct") return SolverKind::Direct;
    if (name == "ieti") return SolverKind::Ieti;
    throw ConfigurationError("unknown solver '" + std::string(name) + "' (expected direct or ieti)");
}

SystemSolver::SystemSolver(const SparseSymmetricSystem& system, const MultiPatchDomain& domain,
                           const GlobalDofMap& dof_map, const SolverOptions& options)
    : system_(&system), options_(options) {
    if (!(options.tol > 0.0)) throw ConfigurationError("solver tolerance must be positive");
    if (options.max_iterations < 1) throw ConfigurationError("solver max_iterations must be at least 1");
    Stopwatch clock;
    if (options.kind == SolverKind::Direct) {
        direct_ = std::make_unique<SparseLdlt>(system.matrix);
    } else {
        const int workers = resolve_worker_count(options.workers);
        if (workers > 1) pool_ = std::make_unique<WorkerPool>(workers);
        const Partition partition = options.subdomains <= 0 ? partition_per_patch(domain, dof_map)
                                                            : partition_balanced(domain, dof_map, options.subdomains);
        ieti_ = std::make_unique<IetiDpOperator>(system, domain, dof_map, partition, options.scaling, pool_.get());
    }
    setup_seconds_ = clock.seconds();
}

SystemSolver::~SystemSolver() = default;
SystemSolver::SystemSolver(SystemSolver&&) noexcept = default;

std::size_t SystemSolver::memory_bytes() const {
    return direct_ ? direct_->memory_bytes() : ieti_->memory_bytes();
}

SolveResult SystemSolver::solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != system_->size()) throw ContractError("right-hand side size does not match the system");
    if (ieti_) {
        SolveResult res = ieti_->solve(rhs, options_.tol, options_.max_iterations, pool_.get());
        res.log.setup_seconds = setup_seconds_;
        return res;
    }
    SolveResult out;
    Stopwatch clock;
    out.x = direct_->solve(rhs);
    out.log.solve_seconds = clock.seconds();
    out.log.setup_seconds = setup_seconds_;
    out.log.factor_seconds = setup_seconds_;
    out.log.memory_bytes = direct_->memory_bytes();
    out.log.relative_residual = relative_residual(system_->matrix, out.x, rhs);
    return out;
}

}  // namespace igashape
