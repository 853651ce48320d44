#include "igashape/io/geometry_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "igashape/errors.hpp"
#include "igashape/io/export.hpp"

namespace igashape {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<double> numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(v, path).size(); ++i) out.push_back(number(v[i], at(path, i)));
    return out;
}

Point2 point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

int patch_index(const json& v, const std::string& path, std::size_t patch_count) {
    const int p = integer(v, path);
    if (p < 0 || static_cast<std::size_t>(p) >= patch_count) fail(path, "patch index " + std::to_string(p) + " out of range");
    return p;
}

Patch read_patch(const json& obj, const std::string& path) {
    const int pu = integer(member(obj, path, "degree_u"), path + ".degree_u");
    const int pv = integer(member(obj, path, "degree_v"), path + ".degree_v");
    auto knots = [&](const char* key, int degree) {
        const std::string kp = path + "." + key;
        try {
            return KnotVector(degree, numbers(member(obj, path, key), kp));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            fail(kp, e.what());
        }
    };
    TensorBasis2D basis{knots("knots_u", pu), knots("knots_v", pv)};
    const std::string cp = path + ".control_points";
    const json& pts = array(member(obj, path, "control_points"), cp);
    if (pts.size() != static_cast<std::size_t>(basis.size())) {
        fail(cp, "expected " + std::to_string(basis.size()) + " control points, found " + std::to_string(pts.size()));
    }
    std::vector<Point2> cps;
    cps.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) cps.push_back(point(pts[i], at(cp, i)));
    return Patch(std::move(basis), std::move(cps));
}

}  // namespace

MultiPatchDomain parse_geometry(const std::string& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("geometry: ") + e.what());
    }
    if (!doc.is_object()) fail("geometry", "expected a top-level object");
    const int version = integer(member(doc, "geometry", "version"), "version");
    if (version != kGeometryFileVersion) fail("version", "unsupported version " + std::to_string(version));

    const json& jp = array(member(doc, "geometry", "patches"), "patches");
    if (jp.empty()) fail("patches", "at least one patch is required");
    std::vector<Patch> patches;
    for (std::size_t i = 0; i < jp.size(); ++i) patches.push_back(read_patch(jp[i], at("patches", i)));
    const std::size_t n = patches.size();

    std::vector<MaterialTag> materials(n, MaterialTag::air());
    std::vector<bool> seen(n, false);
    const json& jm = array(member(doc, "geometry", "materials"), "materials");
    for (std::size_t i = 0; i < jm.size(); ++i) {
        const std::string mp = at("materials", i);
        const int p = patch_index(member(jm[i], mp, "patch"), mp + ".patch", n);
        if (seen[p]) fail(mp + ".patch", "patch " + std::to_string(p) + " has two materials");
        seen[p] = true;
        MaterialTag tag;
        const std::string kind = text(member(jm[i], mp, "kind"), mp + ".kind");
        try {
            tag.kind = parse_material(kind);
        } catch (const Error& e) {
            fail(mp + ".kind", e.what());
        }
        tag.reluctivity = number(member(jm[i], mp, "reluctivity"), mp + ".reluctivity");
        if (auto it = jm[i].find("magnetization"); it != jm[i].end() && !it->is_null()) {
            tag.magnetization = point(*it, mp + ".magnetization");
        }
        try {
            tag.validate();
        } catch (const ConfigurationError& e) {
            fail(mp, e.what());
        }
        materials[p] = tag;
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (!seen[p]) fail("materials", "patch " + std::to_string(p) + " has no material");
    }

    std::vector<SideRef> dirichlet;
    if (auto it = doc.find("dirichlet"); it != doc.end()) {
        const json& jd = array(*it, "dirichlet");
        for (std::size_t i = 0; i < jd.size(); ++i) {
            const std::string dp = at("dirichlet", i);
            SideRef s;
            s.patch = patch_index(member(jd[i], dp, "patch"), dp + ".patch", n);
            const std::string side = text(member(jd[i], dp, "side"), dp + ".side");
            try {
                s.side = parse_side(side);
            } catch (const Error& e) {
                fail(dp + ".side", e.what());
            }
            dirichlet.push_back(s);
        }
    }

    std::set<int> design;
    if (auto it = doc.find("design"); it != doc.end()) {
        const json& jd = array(*it, "design");
        for (std::size_t i = 0; i < jd.size(); ++i) design.insert(patch_index(jd[i], at("design", i), n));
    }

    AirGapCurve airgap;
    if (auto it = doc.find("airgap"); it != doc.end() && !it->is_null()) {
        const json& js = array(member(*it, "airgap", "segments"), "airgap.segments");
        for (std::size_t i = 0; i < js.size(); ++i) {
            const std::string sp = at("airgap.segments", i);
            AirGapSegment seg;
            seg.patch = patch_index(member(js[i], sp, "patch"), sp + ".patch", n);
            seg.fixed_dir = integer(member(js[i], sp, "fixed_dir"), sp + ".fixed_dir");
            if (seg.fixed_dir != 0 && seg.fixed_dir != 1) fail(sp + ".fixed_dir", "expected 0 or 1");
            seg.value = number(member(js[i], sp, "value"), sp + ".value");
            seg.from = number(member(js[i], sp, "from"), sp + ".from");
            seg.to = number(member(js[i], sp, "to"), sp + ".to");
            airgap.segments.push_back(seg);
        }
    }
    return build_topology(std::move(patches), std::move(materials), std::move(dirichlet), std::move(design),
                          std::move(airgap));
}

MultiPatchDomain read_geometry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open geometry file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_geometry(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_geometry(const MultiPatchDomain& domain) {
    json doc;
    doc["version"] = kGeometryFileVersion;
    json patches = json::array();
    for (const Patch& p : domain.patches()) {
        json cps = json::array();
        for (const Point2& c : p.control_points()) cps.push_back({c.x(), c.y()});
        patches.push_back({{"degree_u", p.degree_u()},
                           {"degree_v", p.degree_v()},
                           {"knots_u", p.basis().u.knots()},
                           {"knots_v", p.basis().v.knots()},
                           {"control_points", std::move(cps)}});
    }
    doc["patches"] = std::move(patches);
    json materials = json::array();
    for (int i = 0; i < domain.patch_count(); ++i) {
        const MaterialTag& m = domain.material(i);
        json e = {{"patch", i}, {"kind", std::string(material_name(m.kind))}, {"reluctivity", m.reluctivity}};
        if (m.magnetization) e["magnetization"] = {m.magnetization->x(), m.magnetization->y()};
        materials.push_back(std::move(e));
    }
    doc["materials"] = std::move(materials);
    json dirichlet = json::array();
    for (const SideRef& s : domain.dirichlet_sides()) {
        dirichlet.push_back({{"patch", s.patch}, {"side", std::string(side_name(s.side))}});
    }
    doc["dirichlet"] = std::move(dirichlet);
    doc["design"] = json(std::vector<int>(domain.design_patches().begin(), domain.design_patches().end()));
    json segments = json::array();
    for (const AirGapSegment& s : domain.airgap().segments) {
        segments.push_back(
            {{"patch", s.patch}, {"fixed_dir", s.fixed_dir}, {"value", s.value}, {"from", s.from}, {"to", s.to}});
    }
    doc["airgap"] = {{"segments", std::move(segments)}};
    return doc.dump(1) + "\n";
}

void write_geometry(const std::filesystem::path& path, const MultiPatchDomain& domain) {
    write_text_file(path, format_geometry(domain));
}

}  // namespace igashape
