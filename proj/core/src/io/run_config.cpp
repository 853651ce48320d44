#include "igashape/io/run_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "igashape/errors.hpp"

namespace igashape {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string p = join(path, key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) fail(p, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) fail(p, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (it->is_number_integer() && !it->is_number_unsigned()) fail(p, "expected a non-negative integer");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) fail(p, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) fail(p, "expected a string");
    }
    out = it->get<T>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

/// Two numeric columns (s, value); a non-numeric first line is a header.
void read_table(const std::filesystem::path& file, std::vector<double>& s, std::vector<double>& values) {
    std::ifstream in(file);
    if (!in) throw ConfigurationError("target.file: cannot open '" + file.string() + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        for (char& c : line) {
            if (c == ',' || c == ';') c = ' ';
        }
        std::istringstream row(line);
        double a = 0.0, b = 0.0;
        if (!(row >> a >> b)) {
            if (lineno == 1) continue;
            throw ParseError(file.string() + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        s.push_back(a);
        values.push_back(b);
    }
}

TargetSpec read_target(const json& obj, const std::filesystem::path& base) {
    const std::string path = "target";
    check_keys(obj, path, {"kind", "pole_pairs", "amplitude", "value", "a0", "cos", "sin", "s", "values", "file"});
    std::string kind = "matched_poles";
    read(obj, path, "kind", kind);
    TargetSpec t;
    read(obj, path, "pole_pairs", t.pole_pairs);
    if (kind == "matched_poles") {
        t.kind = TargetSpec::Kind::MatchedPoles;
    } else if (kind == "poles") {
        t.kind = TargetSpec::Kind::Poles;
        if (!obj.contains("amplitude")) fail(path, "poles target needs 'amplitude'");
        read(obj, path, "amplitude", t.amplitude);
    } else if (kind == "constant") {
        t.kind = TargetSpec::Kind::Constant;
        if (!obj.contains("value")) fail(path, "constant target needs 'value'");
        read(obj, path, "value", t.value);
    } else if (kind == "fourier") {
        t.kind = TargetSpec::Kind::Fourier;
        read(obj, path, "a0", t.value);
        if (obj.contains("cos")) t.cos_coeffs = numbers(obj["cos"], "target.cos");
        if (obj.contains("sin")) t.sin_coeffs = numbers(obj["sin"], "target.sin");
    } else if (kind == "table") {
        t.kind = TargetSpec::Kind::Table;
        if (obj.contains("file")) {
            std::string file;
            read(obj, path, "file", file);
            std::filesystem::path p(file);
            if (p.is_relative()) p = base / p;
            if (!std::filesystem::exists(p)) throw ConfigurationError("target.file: '" + p.string() + "' does not exist");
            read_table(p, t.table_s, t.table_values);
        } else {
            if (!obj.contains("s") || !obj.contains("values")) fail(path, "table target needs 's' and 'values' or 'file'");
            t.table_s = numbers(obj["s"], "target.s");
            t.table_values = numbers(obj["values"], "target.values");
        }
        // validates ordering and sizes
        (void)TargetFlux::tabulated(t.table_s, t.table_values);
    } else {
        fail("target.kind", "unknown kind '" + kind + "' (expected matched_poles, poles, constant, fourier or table)");
    }
    return t;
}

}  // namespace

TargetFlux TargetSpec::resolve(double matched_amplitude) const {
    switch (kind) {
        case Kind::MatchedPoles: return TargetFlux::poles(pole_pairs, matched_amplitude);
        case Kind::Poles: return TargetFlux::poles(pole_pairs, amplitude);
        case Kind::Constant: return TargetFlux::constant(value);
        case Kind::Fourier: return TargetFlux::fourier(value, cos_coeffs, sin_coeffs);
        case Kind::Table: return TargetFlux::tabulated(table_s, table_values);
    }
    return {};
}

void RunConfig::validate() const {
    auto bad = [](const std::string& what) { throw ConfigurationError(what); };
    if (!(solver.tol > 0.0 && solver.tol < 1.0)) bad("tol must lie in (0, 1)");
    if (solver.max_iterations < 1) bad("max_solver_iterations must be at least 1");
    if (solver.workers < 0) bad("workers must be non-negative (0: environment or 1)");
    if (solver.subdomains < 0) bad("subdomains must be non-negative (0: one per patch)");
    if (quadrature.extra < 0) bad("quadrature_extra must be non-negative");
    if (target.pole_pairs < 1) bad("target.pole_pairs must be at least 1");
    for (double a : alpha) {
        if (!(a > 0.0)) bad("alpha values must be positive");
    }
    if (bench_rhs != "load" && bench_rhs != "random") bad("bench.rhs must be 'load' or 'random'");
    if (bench_repeats < 1) bad("bench.repeats must be at least 1");
    for (const auto& [p, j] : current_density) {
        if (p < 0) bad("current_density patch index must be non-negative");
        if (!std::isfinite(j)) bad("current_density values must be finite");
    }
    optimizer.validate();
}

std::vector<double> RunConfig::alpha_for(int patch_count) const {
    if (alpha.empty()) return {};
    if (alpha.size() == 1) return std::vector<double>(static_cast<std::size_t>(patch_count), alpha.front());
    if (static_cast<int>(alpha.size()) != patch_count) {
        throw ConfigurationError("alpha has " + std::to_string(alpha.size()) + " entries for " +
                                 std::to_string(patch_count) + " patches");
    }
    return alpha;
}

SourceSpec RunConfig::source_for(int patch_count) const {
    SourceSpec s;
    if (!current_density.empty()) {
        s.current_density.assign(static_cast<std::size_t>(patch_count), 0.0);
        for (const auto& [p, j] : current_density) {
            if (p >= patch_count) throw ConfigurationError("current_density names patch " + std::to_string(p) +
                                                           " but the geometry has " + std::to_string(patch_count));
            s.current_density[p] = j;
        }
    }
    if (manufactured) {
        s.density = [](const Point2& x) {
            constexpr double pi = std::numbers::pi;
            return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
        };
    }
    return s;
}

RunConfig parse_run_config(const std::string& source, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    check_keys(doc, "",
               {"solver", "workers", "tol", "max_solver_iterations", "subdomains", "scaling", "quadrature_extra",
                "optimizer", "target", "alpha", "current_density", "manufactured", "bench", "output",
                "deterministic", "seed"});
    RunConfig c;
    c.solver.workers = 0;  // IGA_SHAPEOPT_THREADS, then 1
    std::string name;
    if (doc.contains("solver")) {
        read(doc, "", "solver", name);
        try {
            c.solver.kind = parse_solver(name);
        } catch (const ConfigurationError& e) {
            fail("solver", e.what());
        }
    }
    read(doc, "", "workers", c.solver.workers);
    read(doc, "", "tol", c.solver.tol);
    read(doc, "", "max_solver_iterations", c.solver.max_iterations);
    read(doc, "", "subdomains", c.solver.subdomains);
    if (doc.contains("scaling")) {
        read(doc, "", "scaling", name);
        if (name == "multiplicity") {
            c.solver.scaling = IetiScaling::Multiplicity;
        } else if (name == "coefficient") {
            c.solver.scaling = IetiScaling::Coefficient;
        } else {
            fail("scaling", "expected multiplicity or coefficient");
        }
    }
    read(doc, "", "quadrature_extra", c.quadrature.extra);
    if (doc.contains("optimizer")) {
        const json& o = doc["optimizer"];
        check_keys(o, "optimizer",
                   {"algorithm", "mode", "nlp_tol", "objective_rel_tol", "patience", "max_iterations", "initial_step",
                    "step_shrink", "max_shrinks", "bound_radius", "bound_relax", "lbfgs_memory"});
        OptimizerConfig& oc = c.optimizer;
        if (o.contains("algorithm")) {
            read(o, "optimizer", "algorithm", name);
            try {
                oc.algorithm = parse_algorithm(name);
            } catch (const ConfigurationError& e) {
                fail("optimizer.algorithm", e.what());
            }
        }
        if (o.contains("mode")) {
            read(o, "optimizer", "mode", name);
            try {
                oc.mode = parse_design_mode(name);
            } catch (const ConfigurationError& e) {
                fail("optimizer.mode", e.what());
            }
        }
        read(o, "optimizer", "nlp_tol", oc.nlp_tol);
        read(o, "optimizer", "objective_rel_tol", oc.objective_rel_tol);
        read(o, "optimizer", "patience", oc.patience);
        read(o, "optimizer", "max_iterations", oc.max_iterations);
        read(o, "optimizer", "initial_step", oc.initial_step);
        read(o, "optimizer", "step_shrink", oc.step_shrink);
        read(o, "optimizer", "max_shrinks", oc.max_shrinks);
        read(o, "optimizer", "bound_radius", oc.bound_radius);
        read(o, "optimizer", "bound_relax", oc.bound_relax);
        read(o, "optimizer", "lbfgs_memory", oc.lbfgs_memory);
    }
    if (doc.contains("target")) c.target = read_target(doc["target"], base_dir);
    if (doc.contains("alpha")) {
        const json& a = doc["alpha"];
        if (a.is_string() && a.get<std::string>() == "default") {
            c.alpha.clear();
        } else if (a.is_number()) {
            c.alpha = {a.get<double>()};
        } else if (a.is_array()) {
            c.alpha = numbers(a, "alpha");
        } else {
            fail("alpha", "expected \"default\", a number, or one number per patch");
        }
    }
    if (doc.contains("current_density")) {
        const json& j = doc["current_density"];
        if (!j.is_array()) fail("current_density", "expected an array of {patch, value}");
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string p = "current_density[" + std::to_string(i) + "]";
            check_keys(j[i], p, {"patch", "value"});
            if (!j[i].contains("patch") || !j[i].contains("value")) fail(p, "needs 'patch' and 'value'");
            int patch = 0;
            double value = 0.0;
            read(j[i], p, "patch", patch);
            read(j[i], p, "value", value);
            c.current_density[patch] = value;
        }
    }
    read(doc, "", "manufactured", c.manufactured);
    if (doc.contains("bench")) {
        const json& b = doc["bench"];
        check_keys(b, "bench", {"rhs", "repeats"});
        read(b, "bench", "rhs", c.bench_rhs);
        read(b, "bench", "repeats", c.bench_repeats);
    }
    if (doc.contains("output")) {
        read(doc, "", "output", name);
        c.output = name;
        if (c.output.is_relative()) c.output = base_dir / c.output;
    }
    read(doc, "", "deterministic", c.deterministic);
    read(doc, "", "seed", c.seed);
    c.validate();
    return c;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_run_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace igashape
