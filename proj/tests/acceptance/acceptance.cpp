// Acceptance checks. Prints one line per criterion:
//   ACn PASS|FAIL|SKIP <measurements>
// Usage: igashape_acceptance [AC1 ... AC8]   (default: all)
// Exit status: 0 when nothing failed, 1 on a failure, 77 when every
// requested criterion was skipped.

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "igashape/assembly/airgap.hpp"
#include "igashape/assembly/field.hpp"
#include "igashape/errors.hpp"
#include "igashape/io/benchmark.hpp"
#include "igashape/io/export.hpp"
#include "igashape/io/run_config.hpp"
#include "igashape/optimization/optimizer.hpp"
#include "igashape/solvers/linear_solver.hpp"

using namespace igashape;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict = Verdict::Fail;
    std::string detail;
};

std::string num(double x, int digits = 3) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(gen);
    return v;
}

// ---------------------------------------------------------------- AC1

Outcome manufactured_rates() {
    const double pi = std::numbers::pi;
    auto exact = [pi](const Point2& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); };
    Outcome out;
    out.verdict = Verdict::Pass;
    for (int degree = 1; degree <= 3; ++degree) {
        std::vector<double> lh, le;
        for (int level = 1; level <= 4; ++level) {
            const MultiPatchDomain d = square_grid(2, level, degree);
            const GlobalDofMap m = build_dof_map(d);
            SparseSymmetricSystem sys = assemble_stiffness(d, m);
            SourceSpec src;
            src.density = [&](const Point2& x) { return 2.0 * pi * pi * exact(x); };
            sys.rhs = assemble_load(d, m, src);
            const SystemSolver solver(sys, d, m, SolverOptions{});
            const Eigen::VectorXd u = solver.solve(sys.rhs).x;
            lh.push_back(std::log(std::ldexp(1.0, -level)));
            le.push_back(std::log(l2_error(d, m, u, exact)));
        }
        const double rate = lsq_slope(lh, le);
        out.detail += "p=" + std::to_string(degree) + " rate " + num(rate) + " (>= " + num(degree + 0.7) + ") ";
        if (!(rate >= degree + 0.7)) out.verdict = Verdict::Fail;
    }
    return out;
}

// ------------------------------------------------ motor problem set-up

/// Default run configuration on a generated motor: matched-pole target from
/// the initial state.
ShapeProblem motor_problem(const MultiPatchDomain& d, const GlobalDofMap& m) {
    const RunConfig cfg;
    ShapeProblem p;
    p.source = cfg.source_for(d.patch_count());
    p.quadrature = cfg.quadrature;
    p.solver = cfg.solver;
    p.alpha = cfg.alpha_for(d.patch_count());
    const StateEvaluation st = evaluate_objective(d, m, p);
    p.target = matched_pole_target(d, m, st.u, p.quadrature);
    return p;
}

// ---------------------------------------------------------------- AC2

Outcome gradient_slopes() {
    const MultiPatchDomain d = motor_like(0);
    const GlobalDofMap m = build_dof_map(d);
    const ShapeProblem p = motor_problem(d, m);
    const ShapeOptimizer opt(d, p, OptimizerConfig{});
    const DesignState st = opt.state_at(Eigen::VectorXd::Zero(opt.design_map().size()));
    const ShapeGradient g = opt.gradient(st);
    // b(grad J, delta) through the Riesz lift
    const Eigen::VectorXd lifted = g.metric->apply(g.gradient);
    std::mt19937_64 gen(2024);
    double worst_dj = std::numeric_limits<double>::infinity();
    double worst_riesz = worst_dj;
    for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd delta = opt.reference_length() * random_vector(opt.design_map().size(), gen);
        const double dj = g.functional.dot(delta);
        const double riesz = lifted.dot(delta);
        std::vector<double> lt, e_dj, e_riesz;
        for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const double fd = (opt.state_at(t * delta).objective - st.objective) / t;
            lt.push_back(std::log10(t));
            e_dj.push_back(std::log10(std::abs(fd - dj)));
            e_riesz.push_back(std::log10(std::abs(fd - riesz)));
        }
        worst_dj = std::min(worst_dj, lsq_slope(lt, e_dj));
        worst_riesz = std::min(worst_riesz, lsq_slope(lt, e_riesz));
    }
    Outcome out;
    out.verdict = worst_dj >= 0.9 && worst_riesz >= 0.9 ? Verdict::Pass : Verdict::Fail;
    out.detail = "min slope dJ " + num(worst_dj) + ", Riesz " + num(worst_riesz) + " over 5 directions (>= 0.9)";
    return out;
}

// ---------------------------------------------------------------- AC3

Outcome solver_equivalence() {
    Outcome out;
    out.verdict = Verdict::Pass;
    for (int level = 0; level <= 2; ++level) {
        const MultiPatchDomain d = motor_like(level);
        const GlobalDofMap m = build_dof_map(d);
        SparseSymmetricSystem sys = assemble_stiffness(d, m);
        sys.rhs = assemble_load(d, m, RunConfig{}.source_for(d.patch_count()));
        SolverOptions o;
        const Eigen::VectorXd direct = SystemSolver(sys, d, m, o).solve(sys.rhs).x;
        o.kind = SolverKind::Ieti;
        o.tol = 1e-8;
        const SolveResult ieti = SystemSolver(sys, d, m, o).solve(sys.rhs);
        const double diff = (ieti.x - direct).lpNorm<Eigen::Infinity>();
        out.detail += "L" + std::to_string(level) + " dofs " + std::to_string(sys.size()) + " |diff| " + num(diff) +
                      " (" + std::to_string(ieti.log.iterations) + " it) ";
        if (!(diff <= 1e-6)) out.verdict = Verdict::Fail;
        if (level == 0) {
            o.subdomains = 1;
            const double single = (SystemSolver(sys, d, m, o).solve(sys.rhs).x - direct).lpNorm<Eigen::Infinity>();
            out.detail += "single-subdomain |diff| " + num(single) + " (<= 1e-12) ";
            if (!(single <= 1e-12)) out.verdict = Verdict::Fail;
        }
    }
    out.detail += "(IETI tol 1e-8, |diff| <= 1e-6)";
    return out;
}

// ---------------------------------------------------------------- AC4

struct SolverRun {
    double dofs = 0;
    double seconds = 0;  // setup + solve
    double solver_bytes = 0;
    double peak_rss = 0;  // bytes, whole child process
    double iterations = 0;
    double ok = 0;
};

/// Generates, assembles and solves in a child process so that each solver
/// gets its own peak resident set.
SolverRun isolated_solve(int level, SolverKind kind) {
    int fd[2];
    if (pipe(fd) != 0) throw Error("pipe failed");
    const pid_t pid = fork();
    if (pid < 0) throw Error("fork failed");
    if (pid == 0) {
        close(fd[0]);
        SolverRun r;
        try {
            const MultiPatchDomain d = motor_like(level);
            const GlobalDofMap m = build_dof_map(d);
            SparseSymmetricSystem sys = assemble_stiffness(d, m);
            sys.rhs = assemble_load(d, m, RunConfig{}.source_for(d.patch_count()));
            SolverOptions o;
            o.kind = kind;
            o.workers = 1;
            Stopwatch clock;
            const SystemSolver s(sys, d, m, o);
            const SolveResult res = s.solve(sys.rhs);
            r.seconds = clock.seconds();
            r.dofs = sys.size();
            r.solver_bytes = static_cast<double>(s.memory_bytes());
            r.iterations = res.log.iterations;
            r.ok = res.log.relative_residual < 1e-6 ? 1 : 0;
        } catch (const std::exception& e) {
            std::cerr << "child: " << e.what() << "\n";
        }
        const ssize_t n = write(fd[1], &r, sizeof r);
        _exit(n == static_cast<ssize_t>(sizeof r) ? 0 : 1);
    }
    close(fd[1]);
    SolverRun r;
    const ssize_t n = read(fd[0], &r, sizeof r);
    close(fd[0]);
    int status = 0;
    rusage ru{};
    wait4(pid, &status, 0, &ru);
    if (n != static_cast<ssize_t>(sizeof r) || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw Error("solver child process failed");
    }
    r.peak_rss = static_cast<double>(ru.ru_maxrss) * 1024.0;
    return r;
}

Outcome ieti_vs_direct() {
    const int level = 4;
    const SolverRun direct = isolated_solve(level, SolverKind::Direct);
    const SolverRun ieti = isolated_solve(level, SolverKind::Ieti);
    const double mb = 1.0 / (1024.0 * 1024.0);
    Outcome out;
    const bool time_ok = ieti.seconds <= 1.5 * direct.seconds;
    const bool rss_ok = ieti.peak_rss < direct.peak_rss;
    const bool bytes_ok = ieti.solver_bytes < direct.solver_bytes;
    out.verdict = time_ok && rss_ok && bytes_ok && direct.ok > 0 && ieti.ok > 0 && direct.dofs >= 2e5
                      ? Verdict::Pass
                      : Verdict::Fail;
    out.detail = "motor L" + std::to_string(level) + " dofs " + num(direct.dofs, 7) + ": time ieti " +
                 num(ieti.seconds) + " s (" + num(ieti.iterations, 4) + " it) vs direct " + num(direct.seconds) +
                 " s, ratio " + num(ieti.seconds / direct.seconds) + " (<= 1.5); peak RSS ieti " +
                 num(ieti.peak_rss * mb, 5) + " MB vs direct " + num(direct.peak_rss * mb, 5) +
                 " MB; solver data ieti " + num(ieti.solver_bytes * mb, 5) + " MB vs direct " +
                 num(direct.solver_bytes * mb, 5) + " MB";
    return out;
}

// ---------------------------------------------------------------- AC5

Outcome strong_scaling() {
    const unsigned cores = std::thread::hardware_concurrency();
    Outcome out;
    if (cores < 4) {
        out.verdict = Verdict::Skip;
        out.detail = "needs >= 4 cores, found " + std::to_string(cores);
        return out;
    }
    const MultiPatchDomain d = motor_like(3);
    const GlobalDofMap m = build_dof_map(d);
    SparseSymmetricSystem sys = assemble_stiffness(d, m);
    sys.rhs = assemble_load(d, m, RunConfig{}.source_for(d.patch_count()));
    std::vector<BenchRow> rows;
    for (int w : {1, 2, 4}) {
        SolverOptions o;
        o.kind = SolverKind::Ieti;
        o.workers = w;
        std::vector<double> setup, solve;
        SolveResult res;
        for (int rep = 0; rep < 3; ++rep) {
            const SystemSolver s(sys, d, m, o);
            res = s.solve(sys.rhs);
            setup.push_back(s.setup_seconds());
            solve.push_back(res.log.solve_seconds);
        }
        std::sort(setup.begin(), setup.end());
        std::sort(solve.begin(), solve.end());
        rows.push_back({sys.size(), "ieti", w, setup[1], solve[1], res.log.iterations, res.log.relative_residual});
    }
    const auto rates = bench_rates(rows);
    out.verdict = Verdict::Pass;
    out.detail = "motor L3 dofs " + std::to_string(sys.size()) + ": rates";
    for (std::size_t k = 1; k < rates.size(); ++k) {
        out.detail += " " + num(rates[k].value_or(0.0));
        if (!(rates[k].value_or(0.0) >= 1.5)) out.verdict = Verdict::Fail;
    }
    out.detail += " (>= 1.5 per doubling)";
    return out;
}

// ------------------------------------------------------- AC6 and AC8

struct RunSummary {
    std::vector<double> objective;
    bool feasible = true;
    bool monotone = true;
    std::string message;
};

RunSummary run_optimizer(OptimizerAlgorithm algorithm) {
    const MultiPatchDomain d = motor_like(0);
    const GlobalDofMap m = build_dof_map(d);
    OptimizerConfig cfg;
    cfg.algorithm = algorithm;
    cfg.max_iterations = 50;
    const ShapeOptimizer opt(d, motor_problem(d, m), cfg);
    std::vector<JacobianSign> initial;
    for (int p = 0; p < d.patch_count(); ++p) initial.push_back(jacobian_sign_certificate(d.patch(p)));
    RunSummary s;
    const OptimizationResult res = opt.run([&](const DesignState& st, const IterateRecord& rec) {
        if (!s.objective.empty() && !(rec.objective <= s.objective.back())) s.monotone = false;
        s.objective.push_back(rec.objective);
        // independent re-certification of every patch
        for (int p = 0; p < st.domain.patch_count(); ++p) {
            const JacobianSign sign = jacobian_sign_certificate(st.domain.patch(p));
            if (sign == JacobianSign::Mixed || sign != initial[p]) s.feasible = false;
        }
        if (!rec.feasible) s.feasible = false;
    });
    s.message = std::string(stop_reason_name(res.reason));
    if (!res.message.empty()) s.message += ": " + res.message;
    return s;
}

const RunSummary& steepest_descent_run() {
    static const RunSummary s = run_optimizer(OptimizerAlgorithm::SteepestDescent);
    return s;
}

Outcome steepest_descent() {
    const RunSummary& s = steepest_descent_run();
    const double j0 = s.objective.front();
    const double j1 = s.objective.back();
    const int accepted = static_cast<int>(s.objective.size()) - 1;
    Outcome out;
    out.verdict = s.monotone && s.feasible && j1 <= 0.8 * j0 ? Verdict::Pass : Verdict::Fail;
    out.detail = "J " + num(j0, 5) + " -> " + num(j1, 5) + " (ratio " + num(j1 / j0) + ", <= 0.8) after " +
                 std::to_string(accepted) + " accepted iterates, " + (s.monotone ? "monotone" : "NOT monotone") +
                 ", " + (s.feasible ? "all certified" : "certificate violated") + ", stop " + s.message;
    return out;
}

Outcome bfgs_vs_steepest() {
    const RunSummary& sd = steepest_descent_run();
    const RunSummary bfgs = run_optimizer(OptimizerAlgorithm::Bfgs);
    const double goal = sd.objective.back();
    const int sd_iterations = static_cast<int>(sd.objective.size()) - 1;
    int reached = -1;
    for (std::size_t k = 0; k < bfgs.objective.size(); ++k) {
        if (bfgs.objective[k] <= goal) {
            reached = static_cast<int>(k);
            break;
        }
    }
    const int budget = sd_iterations / 2;
    Outcome out;
    out.verdict = reached >= 0 && reached <= budget && bfgs.feasible ? Verdict::Pass : Verdict::Fail;
    out.detail = "steepest descent J " + num(goal, 5) + " after " + std::to_string(sd_iterations) +
                 " iterations; BFGS " +
                 (reached >= 0 ? "reaches it at iteration " + std::to_string(reached)
                               : "does not reach it (best " +
                                     num(*std::min_element(bfgs.objective.begin(), bfgs.objective.end()), 5) + ")") +
                 " (<= " + std::to_string(budget) + ")";
    return out;
}

// ---------------------------------------------------------------- AC7

Outcome fold_guard() {
    const MultiPatchDomain d = motor_like(0);
    const GlobalDofMap m = build_dof_map(d);
    OptimizerConfig cfg;
    cfg.bound_radius = 10.0;  // bounds must not hide the fold
    const ShapeOptimizer opt(d, motor_problem(d, m), cfg);
    const DesignVariableMap& dv = opt.design_map();
    const int n = dv.point_count();
    const DesignState st = opt.state_at(Eigen::VectorXd::Zero(dv.size()));
    const ShapeGradient g = opt.gradient(st);
    auto mixed_at = [&](const Eigen::VectorXd& dir, double t) {
        const MultiPatchDomain trial = apply_design_update(d, m, dv, dir, t);
        for (int p : opt.monitored_patches()) {
            if (jacobian_sign_certificate(trial.patch(p)) == JacobianSign::Mixed) return true;
        }
        return false;
    };
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    int trials = 0, guarded = 0, rejected = 0, shrunk = 0;
    std::string failure;
    while (trials < 100) {
        // one design point pushed far enough to fold its patch at the full step
        const int i = pick(gen);
        const double a = angle(gen);
        Eigen::VectorXd fold = Eigen::VectorXd::Zero(dv.size());
        fold(i) = std::cos(a);
        fold(n + i) = std::sin(a);
        double len = opt.reference_length();
        while (!mixed_at(fold * len, 1.0) && len < 100.0 * opt.reference_length()) len *= 1.5;
        if (!mixed_at(fold * len, 1.0)) continue;
        Eigen::VectorXd dir = fold * len;
        // tilt toward descent without removing the fold
        const double slope = g.functional.dot(dir);
        if (slope >= 0.0) dir -= (2.0 * slope / (g.norm * g.norm) + 1e-3 * len / g.gradient.norm()) * g.gradient;
        if (!(g.functional.dot(dir) < 0.0) || !mixed_at(dir, 1.0)) continue;
        ++trials;
        const LineSearchResult ls = opt.line_search(st, g, dir);
        if (!ls.accepted) {
            ++rejected;
            ++guarded;
            continue;
        }
        bool ok = ls.step < cfg.initial_step && ls.state.feasibility == opt.initial_signs();
        for (int p = 0; p < ls.state.domain.patch_count(); ++p) {
            if (jacobian_sign_certificate(ls.state.domain.patch(p)) == JacobianSign::Mixed) ok = false;
        }
        if (ok) {
            ++shrunk;
            ++guarded;
        } else if (failure.empty()) {
            failure = "; trial " + std::to_string(trials) + " accepted step " + num(ls.step);
        }
    }
    Outcome out;
    out.verdict = guarded == trials ? Verdict::Pass : Verdict::Fail;
    out.detail = std::to_string(guarded) + "/" + std::to_string(trials) + " folding trials guarded (" +
                 std::to_string(shrunk) + " accepted a smaller certified step, " + std::to_string(rejected) +
                 " rejected)" + failure;
    return out;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Skip: return "SKIP";
    }
    return "?";
}

}  // namespace

int main(int argc, char** argv) {
    struct Check {
        std::function<Outcome()> run;
        double limit_s;  // runtime bound, 0 for none
    };
    const std::map<std::string, Check> checks{
        {"AC1", {manufactured_rates, 60.0}}, {"AC2", {gradient_slopes, 300.0}}, {"AC3", {solver_equivalence, 300.0}},
        {"AC4", {ieti_vs_direct, 0.0}},      {"AC5", {strong_scaling, 0.0}},    {"AC6", {steepest_descent, 900.0}},
        {"AC7", {fold_guard, 0.0}},          {"AC8", {bfgs_vs_steepest, 0.0}},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    if (wanted.empty()) {
        for (const auto& [name, fn] : checks) wanted.push_back(name);
    }
    int failed = 0, skipped = 0;
    for (const std::string& name : wanted) {
        const auto it = checks.find(name);
        if (it == checks.end()) {
            std::cerr << "unknown criterion " << name << "\n";
            return 2;
        }
        Outcome o;
        Stopwatch clock;
        try {
            o = it->second.run();
        } catch (const std::exception& e) {
            o.verdict = Verdict::Fail;
            o.detail = std::string("error: ") + e.what();
        }
        const double seconds = clock.seconds();
        const double limit = it->second.limit_s;
        if (limit > 0.0 && seconds >= limit && o.verdict == Verdict::Pass) o.verdict = Verdict::Fail;
        std::cout << name << " " << verdict_name(o.verdict) << " " << o.detail << " [" << num(seconds) << " s"
                  << (limit > 0.0 ? ", limit " + num(limit) + " s" : std::string()) << "]" << std::endl;
        if (o.verdict == Verdict::Fail) ++failed;
        if (o.verdict == Verdict::Skip) ++skipped;
    }
    if (failed > 0) return 1;
    return skipped == static_cast<int>(wanted.size()) ? 77 : 0;
}
