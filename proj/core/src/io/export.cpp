#include "igashape/io/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "igashape/assembly/field.hpp"
#include "igashape/errors.hpp"

namespace igashape {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Parameter samples: every span split into `per_span` equal pieces.
std::vector<double> sample_params(const KnotVector& kv, int per_span) {
    const std::vector<double> b = kv.breaks();
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        for (int k = 0; k < per_span; ++k) out.push_back(b[i] + (b[i + 1] - b[i]) * k / per_span);
    }
    out.push_back(b.back());
    return out;
}

}  // namespace

void write_coefficients_csv(std::ostream& out, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                            const Eigen::VectorXd& u) {
    const Eigen::VectorXd full = expand_to_global(dof_map, u);
    std::vector<Point2> where(static_cast<std::size_t>(dof_map.global_count()));
    std::vector<bool> seen(where.size(), false);
    for (int p = 0; p < domain.patch_count(); ++p) {
        const auto& dofs = dof_map.patch_dofs(p);
        for (std::size_t l = 0; l < dofs.size(); ++l) {
            if (!seen[dofs[l]]) {
                seen[dofs[l]] = true;
                where[dofs[l]] = domain.patch(p).control_points()[l];
            }
        }
    }
    out << "dof,x,y,u\n";
    for (int g = 0; g < dof_map.global_count(); ++g) {
        out << g << ',' << num(where[g].x()) << ',' << num(where[g].y()) << ',' << num(full(g)) << '\n';
    }
}

void write_patch_vtk(std::ostream& out, const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                     const Eigen::VectorXd& u, int patch, int samples_per_span) {
    if (samples_per_span < 1) throw ContractError("samples_per_span must be positive");
    const Patch& pt = domain.patch(patch);
    const std::vector<double> su = sample_params(pt.basis().u, samples_per_span);
    const std::vector<double> sv = sample_params(pt.basis().v, samples_per_span);
    std::vector<FieldValue> f;
    f.reserve(su.size() * sv.size());
    // VTK structured grids run with the first index fastest
    for (double v : sv) {
        for (double uu : su) f.push_back(evaluate_field(domain, dof_map, u, patch, uu, v));
    }
    out << "# vtk DataFile Version 3.0\n"
        << "patch " << patch << " (" << material_name(domain.material(patch).kind) << ")\n"
        << "ASCII\nDATASET STRUCTURED_GRID\n"
        << "DIMENSIONS " << su.size() << ' ' << sv.size() << " 1\n"
        << "POINTS " << f.size() << " double\n";
    for (const FieldValue& s : f) out << num(s.point.x()) << ' ' << num(s.point.y()) << " 0\n";
    out << "POINT_DATA " << f.size() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (const FieldValue& s : f) out << num(s.value) << '\n';
    // B = (du/dy, -du/dx), so |B| = |grad u|
    out << "SCALARS B_magnitude double 1\nLOOKUP_TABLE default\n";
    for (const FieldValue& s : f) out << num(s.gradient.norm()) << '\n';
}

std::vector<std::filesystem::path> write_field_vtk(const std::filesystem::path& dir, const std::string& stem,
                                                   const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                                   const Eigen::VectorXd& u, int samples_per_span) {
    std::vector<std::filesystem::path> out;
    for (int p = 0; p < domain.patch_count(); ++p) {
        char name[64];
        std::snprintf(name, sizeof name, "_%03d.vtk", p);
        std::ostringstream s;
        write_patch_vtk(s, domain, dof_map, u, p, samples_per_span);
        out.push_back(dir / (stem + name));
        write_text_file(out.back(), s.str());
    }
    return out;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& profile) {
    out << "s,x,y,flux,target\n";
    for (const ProfilePoint& p : profile) {
        out << num(p.s) << ',' << num(p.point.x()) << ',' << num(p.point.y()) << ',' << num(p.flux) << ','
            << num(p.target) << '\n';
    }
}

void write_history_csv(std::ostream& out, const std::vector<IterateRecord>& history) {
    out << "iteration,J,step,gradient_norm,shrink_count,feasible\n";
    for (const IterateRecord& r : history) {
        out << r.iteration << ',' << num(r.objective) << ',' << num(r.step) << ',' << num(r.gradient_norm) << ','
            << r.shrinks << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

std::vector<std::optional<double>> bench_rates(const std::vector<BenchRow>& rows) {
    std::vector<std::optional<double>> out(rows.size());
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double prev = rows[k - 1].setup_s + rows[k - 1].solve_s;
        const double cur = rows[k].setup_s + rows[k].solve_s;
        if (cur > 0.0) out[k] = prev / cur;
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    const auto rates = bench_rates(rows);
    out << "dofs,solver,workers,setup_s,solve_s,iterations,rel_residual,rate\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const BenchRow& r = rows[k];
        out << r.dofs << ',' << r.solver << ',' << r.workers << ',' << num(r.setup_s) << ',' << num(r.solve_s) << ','
            << r.iterations << ',' << num(r.rel_residual) << ',' << (rates[k] ? num(*rates[k]) : "--") << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace igashape
