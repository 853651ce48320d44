#include <benchmark/benchmark.h>

#include "igashape/assembly/airgap.hpp"
#include "igashape/assembly/forms.hpp"
#include "igashape/io/benchmark.hpp"
#include "igashape/solvers/linear_solver.hpp"
#include "igashape/solvers/sparse_ldlt.hpp"

using namespace igashape;

namespace {

struct Problem {
    MultiPatchDomain domain;
    GlobalDofMap map;
    SparseSymmetricSystem system;
};

// level -> assembled motor problem, built once per level
const Problem& motor(int level) {
    static std::vector<std::unique_ptr<Problem>> cache(8);
    auto& slot = cache.at(static_cast<std::size_t>(level));
    if (!slot) {
        slot = std::make_unique<Problem>();
        slot->domain = motor_like(level);
        slot->map = build_dof_map(slot->domain);
        slot->system = assemble_stiffness(slot->domain, slot->map);
        slot->system.rhs = assemble_load(slot->domain, slot->map, SourceSpec{});
    }
    return *slot;
}

void BM_AssembleStiffness(benchmark::State& state) {
    const MultiPatchDomain domain = motor_like(static_cast<int>(state.range(0)));
    const GlobalDofMap map = build_dof_map(domain);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(domain, map));
    state.counters["dofs"] = map.free_count();
}
BENCHMARK(BM_AssembleStiffness)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SparseLdltFactor(benchmark::State& state) {
    const Problem& pr = motor(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(SparseLdlt(pr.system.matrix));
    state.counters["dofs"] = pr.system.size();
}
BENCHMARK(BM_SparseLdltFactor)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_PatchFactorNestedDissection(benchmark::State& state) {
    const Problem& pr = motor(static_cast<int>(state.range(0)));
    const int p = MotorLayout::patch(2, 0);
    const SparseMatrix& k = pr.system.patch_blocks[static_cast<std::size_t>(p)];
    SparseMatrix shifted = k;
    shifted.diagonal().array() += 1e-3 * k.diagonal().maxCoeff();
    const TensorBasis2D& b = pr.domain.patch(p).basis();
    const std::vector<int> order = grid_nested_dissection(b.size_u(), b.size_v(), b.u.degree(), b.v.degree());
    for (auto _ : state) {
        if (state.range(1) != 0) {
            benchmark::DoNotOptimize(SparseLdlt(shifted, order, {}));
        } else {
            benchmark::DoNotOptimize(SparseLdlt(shifted));
        }
    }
    state.SetLabel(state.range(1) != 0 ? "nested dissection" : "amd");
}
BENCHMARK(BM_PatchFactorNestedDissection)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Solver(benchmark::State& state) {
    const Problem& pr = motor(static_cast<int>(state.range(0)));
    SolverOptions o;
    o.kind = state.range(1) != 0 ? SolverKind::Ieti : SolverKind::Direct;
    int iterations = 0;
    for (auto _ : state) {
        const SystemSolver s(pr.system, pr.domain, pr.map, o);
        const SolveResult r = s.solve(pr.system.rhs);
        iterations = r.log.iterations;
        benchmark::DoNotOptimize(r.x.data());
    }
    state.counters["dofs"] = pr.system.size();
    state.counters["pcg_iterations"] = iterations;
    state.SetLabel(std::string(solver_name(o.kind)));
}
BENCHMARK(BM_Solver)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_IetiDualOperator(benchmark::State& state) {
    const Problem& pr = motor(static_cast<int>(state.range(0)));
    SolverOptions o;
    o.kind = SolverKind::Ieti;
    const SystemSolver s(pr.system, pr.domain, pr.map, o);
    const IetiDpOperator& op = *s.ieti();
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(op.dual_dofs().size()));
    for (auto _ : state) {
        lambda = op.apply_dual(lambda);
        lambda /= lambda.norm();
    }
    state.counters["duals"] = static_cast<double>(lambda.size());
}
BENCHMARK(BM_IetiDualOperator)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
