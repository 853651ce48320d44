#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "igashape/assembly/airgap.hpp"
#include "igashape/assembly/field.hpp"
#include "igashape/errors.hpp"
#include "igashape/io/benchmark.hpp"
#include "igashape/io/export.hpp"
#include "igashape/io/geometry_file.hpp"
#include "igashape/io/run_config.hpp"
#include "igashape/optimization/optimizer.hpp"

namespace igashape::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigurationError*>(&e)) return kParse;
    if (dynamic_cast<const TopologyError*>(&e)) return kTopology;
    if (dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const FeasibilityError*>(&e)) return kGeometry;
    if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const PartitionError*>(&e)) return kSolver;
    return kFailure;
}

std::vector<int> parse_worker_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || n < 1) {
            throw ParseError("--workers: expected a positive count or a comma-separated list, got '" + text + "'");
        }
        out.push_back(n);
    }
    if (out.empty()) throw ParseError("--workers: empty list");
    return out;
}

namespace {

struct Flags {
    std::string geometry;
    std::string config;
    std::string out;
    std::string solver;
    std::string workers;
    bool deterministic = false;
    std::optional<std::uint64_t> seed;
};

struct GenerateFlags {
    std::string kind = "motor_like";
    int level = 0;
    int grid = 2;
    int degree = 3;
    std::string out = "out";
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return buf;
}

struct Run {
    MultiPatchDomain domain;
    GlobalDofMap dof_map;
    RunConfig config;
    fs::path out;
};

Run load(const Flags& f, bool single_worker) {
    Run r;
    r.config = f.config.empty() ? RunConfig{} : read_run_config(f.config);
    if (f.config.empty()) r.config.solver.workers = 0;
    if (!f.solver.empty()) {
        try {
            r.config.solver.kind = parse_solver(f.solver);
        } catch (const ConfigurationError& e) {
            throw ParseError(std::string("--solver: ") + e.what());
        }
    }
    if (!f.workers.empty() && single_worker) {
        const auto w = parse_worker_list(f.workers);
        if (w.size() != 1) throw ParseError("--workers: this subcommand takes a single count");
        r.config.solver.workers = w.front();
    }
    if (f.deterministic) r.config.deterministic = true;
    if (f.seed) r.config.seed = *f.seed;
    r.out = f.out.empty() ? r.config.output : fs::path(f.out);
    r.domain = read_geometry(f.geometry);
    r.dof_map = build_dof_map(r.domain);
    return r;
}

ShapeProblem make_problem(const Run& r) {
    ShapeProblem p;
    p.source = r.config.source_for(r.domain.patch_count());
    p.quadrature = r.config.quadrature;
    p.solver = r.config.solver;
    p.alpha = r.config.alpha_for(r.domain.patch_count());
    return p;
}

bool has_curve(const MultiPatchDomain& d) { return !d.airgap().segments.empty(); }

/// Fixes B_d; the matched target needs the state on the given geometry.
void resolve_target(const Run& r, ShapeProblem& problem, const StateEvaluation* state) {
    if (r.config.target.kind != TargetSpec::Kind::MatchedPoles || !has_curve(r.domain)) {
        problem.target = r.config.target.resolve(0.0);
        return;
    }
    std::optional<StateEvaluation> own;
    if (!state) {
        own = evaluate_objective(r.domain, r.dof_map, problem);
        state = &*own;
    }
    problem.target = matched_pole_target(r.domain, r.dof_map, state->u, problem.quadrature);
}

void write_profile(const fs::path& path, const MultiPatchDomain& d, const GlobalDofMap& m, const ShapeProblem& p,
                   const Eigen::VectorXd& u) {
    std::ostringstream s;
    write_profile_csv(s, airgap_profile(d, m, p.target, u, p.quadrature));
    write_text_file(path, s.str());
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    Run r = load(f, true);
    ShapeProblem problem = make_problem(r);
    StateEvaluation st = evaluate_objective(r.domain, r.dof_map, problem);
    resolve_target(r, problem, &st);
    nlohmann::json summary;
    summary["global_dofs"] = r.dof_map.global_count();
    summary["free_dofs"] = r.dof_map.free_count();
    summary["solver"] = std::string(solver_name(r.config.solver.kind));
    summary["workers"] = st.log.workers;
    summary["iterations"] = st.log.iterations;
    summary["relative_residual"] = st.log.relative_residual;
    summary["interface_jump"] = st.log.interface_jump;
    out << "dofs " << r.dof_map.global_count() << " (free " << r.dof_map.free_count() << ")\n"
        << "solver " << solver_name(r.config.solver.kind) << ", iterations " << st.log.iterations
        << ", relative residual " << fmt(st.log.relative_residual) << "\n";

    std::ostringstream coeffs;
    write_coefficients_csv(coeffs, r.domain, r.dof_map, st.u);
    write_text_file(r.out / "u.csv", coeffs.str());
    write_field_vtk(r.out / "vtk", "field", r.domain, r.dof_map, st.u);
    if (has_curve(r.domain)) {
        const double j = assemble_airgap_terms(r.domain, r.dof_map, problem.target, st.u, problem.quadrature).objective;
        summary["J"] = j;
        out << "J " << fmt(j) << "\n";
        write_profile(r.out / "gamma_profile.csv", r.domain, r.dof_map, problem, st.u);
    }
    if (r.config.manufactured) {
        const double e = l2_error(r.domain, r.dof_map, st.u, [](const Point2& x) {
            return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
        });
        summary["l2_error"] = e;
        out << "l2_error " << fmt(e) << "\n";
    }
    write_text_file(r.out / "summary.json", summary.dump(1) + "\n");
    out << "wrote " << r.out.string() << "\n";
    return kOk;
}

int cmd_optimize(const Flags& f, std::ostream& out, std::ostream& err) {
    Run r = load(f, true);
    ShapeProblem problem = make_problem(r);
    resolve_target(r, problem, nullptr);
    write_geometry(r.out / "initial_geometry.json", r.domain);
    const ShapeOptimizer opt(r.domain, problem, r.config.optimizer);
    out << "design variables " << opt.design_map().size() << " (" << design_mode_name(r.config.optimizer.mode)
        << ", " << algorithm_name(r.config.optimizer.algorithm) << ")\n";
    out << "iteration J step gradient_norm shrinks\n";
    auto on_iterate = [&](const DesignState& s, const IterateRecord& rec) {
        char name[48];
        std::snprintf(name, sizeof name, "profile_%04d.csv", rec.iteration);
        if (has_curve(s.domain)) write_profile(r.out / "profiles" / name, s.domain, opt.dof_map(), opt.problem(), s.state.u);
        std::snprintf(name, sizeof name, "iterate_%04d.json", rec.iteration);
        write_geometry(r.out / "geometries" / name, s.domain);
        out << rec.iteration << ' ' << fmt(rec.objective) << ' ' << fmt(rec.step) << ' ' << fmt(rec.gradient_norm)
            << ' ' << rec.shrinks << "\n";
    };
    const OptimizationResult res = opt.run(on_iterate);
    std::ostringstream hist;
    write_history_csv(hist, res.history);
    write_text_file(r.out / "history.csv", hist.str());
    write_geometry(r.out / "final_geometry.json", res.final_state.domain);
    nlohmann::json summary;
    summary["reason"] = std::string(stop_reason_name(res.reason));
    summary["message"] = res.message;
    summary["accepted_iterations"] = static_cast<int>(res.history.size()) - 1;
    summary["initial_J"] = res.history.front().objective;
    summary["final_J"] = res.history.back().objective;
    summary["design_variables"] = opt.design_map().size();
    write_text_file(r.out / "summary.json", summary.dump(1) + "\n");
    out << "stopped: " << stop_reason_name(res.reason) << "\n"
        << "J " << fmt(res.history.front().objective) << " -> " << fmt(res.history.back().objective) << "\n";
    if (res.reason == StopReason::LineSearchFailed) {
        err << "error: " << res.message << "\n";
        return kInfeasible;
    }
    return kOk;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const Flags& f, std::ostream& out, std::ostream& err) {
    Run r = load(f, false);
    const std::vector<int> workers =
        f.workers.empty() ? std::vector<int>{resolve_worker_count(r.config.solver.workers)} : parse_worker_list(f.workers);
    const ShapeProblem problem = make_problem(r);
    SparseSymmetricSystem sys = assemble_stiffness(r.domain, r.dof_map, problem.quadrature);
    if (r.config.bench_rhs == "load") {
        sys.rhs = assemble_load(r.domain, r.dof_map, problem.source, problem.quadrature);
    } else {
        std::mt19937_64 gen(r.config.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        sys.rhs.resize(sys.size());
        for (int i = 0; i < sys.size(); ++i) sys.rhs(i) = dist(gen);
    }
    std::vector<BenchRow> rows;
    for (int w : workers) {
        SolverOptions opts = r.config.solver;
        opts.workers = w;
        std::vector<double> setup, solve;
        BenchRow row;
        for (int k = 0; k < r.config.bench_repeats; ++k) {
            Stopwatch t0;
            SystemSolver solver(sys, r.domain, r.dof_map, opts);
            setup.push_back(t0.seconds());
            Stopwatch t1;
            const SolveResult res = solver.solve(sys.rhs);
            solve.push_back(t1.seconds());
            row.iterations = res.log.iterations;
            row.rel_residual = res.log.relative_residual;
        }
        row.dofs = r.dof_map.free_count();
        row.solver = std::string(solver_name(opts.kind));
        row.workers = w;
        row.setup_s = median(setup);
        row.solve_s = median(solve);
        rows.push_back(row);
    }
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    write_text_file(r.out / "bench.csv", csv.str());
    out << csv.str();
    if (r.config.deterministic) {
        for (const BenchRow& row : rows) {
            if (row.iterations != rows.front().iterations || row.rel_residual != rows.front().rel_residual) {
                err << "error: results differ across worker counts in deterministic mode\n";
                return kSolver;
            }
        }
    }
    return kOk;
}

int cmd_generate(const GenerateFlags& g, std::ostream& out) {
    BenchmarkSpec spec;
    spec.kind = parse_benchmark(g.kind);
    spec.level = g.level;
    spec.grid = g.grid;
    spec.degree = g.degree;
    const MultiPatchDomain d = generate_benchmark(spec);
    std::string name = std::string(benchmark_name(spec.kind));
    if (spec.kind == BenchmarkKind::SquareGrid) {
        name += "_" + std::to_string(g.grid) + "x" + std::to_string(g.grid) + "_p" + std::to_string(g.degree);
    }
    name += "_level" + std::to_string(g.level) + ".json";
    const fs::path path = fs::path(g.out) / name;
    write_geometry(path, d);
    out << path.string() << ": " << d.patch_count() << " patches, " << build_dof_map(d).global_count()
        << " global dofs\n";
    return kOk;
}

void add_common(CLI::App* sub, Flags& f, bool worker_list) {
    sub->add_option("--geometry", f.geometry, "Geometry file (JSON)")->required();
    sub->add_option("--config", f.config, "Run configuration (JSON)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--solver", f.solver, "Linear solver: direct or ieti");
    sub->add_option("--workers", f.workers,
                    worker_list ? "Worker counts, e.g. 1,2,4" : "Worker threads (default: IGA_SHAPEOPT_THREADS or 1)");
    sub->add_flag("--deterministic", f.deterministic, "Require identical results across worker counts");
    sub->add_option("--seed", f.seed, "Seed for random right-hand sides");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multipatch IGA magnetostatics, shape optimization and IETI-DP solver"};
    app.require_subcommand(1);
    Flags sim, opt, bench;
    GenerateFlags gen;
    auto* s = app.add_subcommand("simulate", "Solve the state problem and export fields");
    add_common(s, sim, false);
    auto* o = app.add_subcommand("optimize", "Run the shape optimization");
    add_common(o, opt, false);
    auto* b = app.add_subcommand("bench", "Time the linear solver over worker counts");
    add_common(b, bench, true);
    auto* g = app.add_subcommand("generate", "Write a benchmark geometry");
    g->add_option("--kind", gen.kind, "motor_like or square_grid")->capture_default_str();
    g->add_option("--level", gen.level, "Uniform refinement level")->capture_default_str();
    g->add_option("--grid", gen.grid, "square_grid: patches per direction")->capture_default_str();
    g->add_option("--degree", gen.degree, "square_grid: spline degree")->capture_default_str();
    g->add_option("--out", gen.out, "Output directory")->capture_default_str();

    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kParse;
    }
    try {
        if (s->parsed()) return cmd_simulate(sim, out);
        if (o->parsed()) return cmd_optimize(opt, out, err);
        if (b->parsed()) return cmd_bench(bench, out, err);
        return cmd_generate(gen, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace igashape::cli
