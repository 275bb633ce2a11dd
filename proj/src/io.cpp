#include "mvkl/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mvkl {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw ValidationError(path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed)
{
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(path + "." + key, "unknown field");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& path)
{
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
}

const json& require_object(const json& v, const std::string& path)
{
    if (!v.is_object()) fail(path, "expected an object");
    return v;
}

double as_real(const json& v, const std::string& path)
{
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& path)
{
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path)
{
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path)
{
    if (v.is_number()) return Vector::Constant(1, v.get<double>());
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        out(static_cast<Eigen::Index>(k)) = as_real(v[k], path + "[" + std::to_string(k) + "]");
    }
    return out;
}

std::vector<int> as_int_list(const json& v, const std::string& path)
{
    if (!v.is_array()) fail(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_int(v[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

Matrix as_matrix(const json& v, const std::string& path)
{
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const Vector first = as_vector(v[0], path + "[0]");
    Matrix m(static_cast<Eigen::Index>(v.size()), first.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
        const Vector row = as_vector(v[r], path + "[" + std::to_string(r) + "]");
        if (row.size() != first.size()) fail(path, "rows have different lengths");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& field)
{
    if (field.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Rows: ambient_dim coordinates, then label components (empty when unlabeled).
void load_points_csv(const std::filesystem::path& file, int p, RunConfig& cfg)
{
    const std::string text = read_text_file(file);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool seen_data = false;
    bool seen_unlabeled = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(trim(f));
        if (!line.empty() && line.back() == ',') fields.emplace_back();

        const std::string where = file.string() + ":" + std::to_string(line_no);
        if (static_cast<int>(fields.size()) < p) {
            if (!seen_data) continue;  // header
            fail(where, "expected at least " + std::to_string(p) + " coordinate columns");
        }
        Vector x(p);
        bool numeric = true;
        for (int k = 0; k < p; ++k) {
            const auto v = parse_number(fields[static_cast<std::size_t>(k)]);
            if (!v) {
                numeric = false;
                break;
            }
            x(k) = *v;
        }
        if (!numeric) {
            if (!seen_data) continue;  // header
            fail(where, "non-numeric coordinate");
        }
        seen_data = true;
        std::vector<double> label;
        bool any_label = false;
        for (std::size_t k = static_cast<std::size_t>(p); k < fields.size(); ++k) {
            if (fields[k].empty()) continue;
            const auto v = parse_number(fields[k]);
            if (!v) fail(where, "non-numeric label component '" + fields[k] + "'");
            label.push_back(*v);
            any_label = true;
        }
        cfg.points.push_back(x);
        if (any_label) {
            if (seen_unlabeled) fail(where, "labeled rows must precede unlabeled rows");
            cfg.labels.push_back(Eigen::Map<const Vector>(label.data(), static_cast<Eigen::Index>(label.size())));
        } else {
            seen_unlabeled = true;
        }
    }
}

KernelKind kernel_kind_from_string(const std::string& s, const std::string& path)
{
    if (s == "scalar-gaussian") return KernelKind::ScalarGaussian;
    if (s == "toy-block") return KernelKind::ToyBlock;
    fail(path, "unknown kernel kind '" + s + "' (expected scalar-gaussian or toy-block)");
}

std::string_view kernel_kind_name(KernelKind k)
{
    return k == KernelKind::ScalarGaussian ? "scalar-gaussian" : "toy-block";
}

void parse_problem(const json& pj, const std::filesystem::path& base_dir, RunConfig& cfg)
{
    const std::string path = "problem";
    require_object(pj, path);
    reject_unknown(pj, path,
                   {"ambient_dim", "points", "points_csv", "point_regions", "dims", "label_dims", "labels",
                    "combination", "loss", "gamma_A", "gamma_I", "kernel", "regions", "regularizer"});

    if (pj.contains("points") == pj.contains("points_csv")) {
        fail(path, "give exactly one of points or points_csv");
    }
    if (pj.contains("ambient_dim")) cfg.ambient_dim = as_int(pj["ambient_dim"], path + ".ambient_dim");
    if (pj.contains("points")) {
        const json& pts = pj["points"];
        if (!pts.is_array() || pts.empty()) fail(path + ".points", "expected a non-empty array of points");
        for (std::size_t k = 0; k < pts.size(); ++k) {
            cfg.points.push_back(as_vector(pts[k], path + ".points[" + std::to_string(k) + "]"));
        }
        if (cfg.ambient_dim == 0) cfg.ambient_dim = static_cast<int>(cfg.points.front().size());
        if (pj.contains("labels")) {
            const json& ls = pj["labels"];
            if (!ls.is_array()) fail(path + ".labels", "expected an array of labels");
            for (std::size_t k = 0; k < ls.size(); ++k) {
                cfg.labels.push_back(as_vector(ls[k], path + ".labels[" + std::to_string(k) + "]"));
            }
        }
    } else {
        if (cfg.ambient_dim <= 0) fail(path + ".ambient_dim", "required (> 0) when points come from CSV");
        if (pj.contains("labels")) fail(path + ".labels", "labels come from the CSV file when points_csv is used");
        std::filesystem::path file = as_string(pj["points_csv"], path + ".points_csv");
        if (file.is_relative()) file = base_dir / file;
        load_points_csv(file, cfg.ambient_dim, cfg);
        if (cfg.points.empty()) fail(path + ".points_csv", "no data rows in " + file.string());
    }
    if (cfg.ambient_dim <= 0) fail(path + ".ambient_dim", "must be positive");
    for (std::size_t k = 0; k < cfg.points.size(); ++k) {
        if (cfg.points[k].size() != cfg.ambient_dim) {
            fail(path + ".points[" + std::to_string(k) + "]",
                 "has " + std::to_string(cfg.points[k].size()) + " coordinates, expected " +
                     std::to_string(cfg.ambient_dim));
        }
    }

    if (pj.contains("point_regions")) cfg.point_regions = as_int_list(pj["point_regions"], path + ".point_regions");
    if (pj.contains("dims")) cfg.dims = as_int_list(pj["dims"], path + ".dims");
    if (pj.contains("label_dims")) cfg.label_dims = as_int_list(pj["label_dims"], path + ".label_dims");
    for (const auto* key : {"dims", "label_dims"}) {
        const auto& v = std::string(key) == "dims" ? cfg.dims : cfg.label_dims;
        if (!v.empty() && v.size() != cfg.points.size()) {
            fail(path + "." + key, "has " + std::to_string(v.size()) + " entries for " +
                                       std::to_string(cfg.points.size()) + " points");
        }
    }
    if (pj.contains("combination")) {
        const json& cs = pj["combination"];
        if (!cs.is_array()) fail(path + ".combination", "expected an array of matrices");
        for (std::size_t k = 0; k < cs.size(); ++k) {
            cfg.combination.push_back(as_matrix(cs[k], path + ".combination[" + std::to_string(k) + "]"));
        }
    }
    try {
        cfg.loss = loss_kind_from_string(as_string(require(pj, "loss", path), path + ".loss"));
    } catch (const ValidationError& e) {
        if (std::string(e.what()).rfind(path, 0) == 0) throw;
        fail(path + ".loss", e.what());
    }
    cfg.gamma_A = as_real(require(pj, "gamma_A", path), path + ".gamma_A");
    if (!(cfg.gamma_A > 0.0)) fail(path + ".gamma_A", "must be > 0");
    if (pj.contains("gamma_I")) cfg.gamma_I = as_real(pj["gamma_I"], path + ".gamma_I");
    if (!(cfg.gamma_I >= 0.0)) fail(path + ".gamma_I", "must be >= 0");

    const json& kj = require_object(require(pj, "kernel", path), path + ".kernel");
    reject_unknown(kj, path + ".kernel", {"kind", "sigma", "alpha"});
    cfg.kernel.kind = kernel_kind_from_string(as_string(require(kj, "kind", path + ".kernel"), path + ".kernel.kind"),
                                              path + ".kernel.kind");
    cfg.kernel.sigma = as_real(require(kj, "sigma", path + ".kernel"), path + ".kernel.sigma");
    if (kj.contains("alpha")) cfg.kernel.alpha = as_real(kj["alpha"], path + ".kernel.alpha");
    if (!(cfg.kernel.sigma > 0.0)) fail(path + ".kernel.sigma", "must be > 0");
    if (!(cfg.kernel.alpha > 0.0)) fail(path + ".kernel.alpha", "must be > 0");

    if (pj.contains("regions")) {
        const json& rj = require_object(pj["regions"], path + ".regions");
        for (const auto& [key, val] : rj.items()) {
            const std::string rp = path + ".regions." + key;
            int id = 0;
            try {
                id = std::stoi(key);
            } catch (const std::exception&) {
                fail(rp, "region keys must be integers");
            }
            require_object(val, rp);
            reject_unknown(val, rp, {"dim", "box"});
            RegionDecl decl;
            decl.dim = as_int(require(val, "dim", rp), rp + ".dim");
            if (decl.dim < 1) fail(rp + ".dim", "must be >= 1");
            if (val.contains("box")) {
                const json& bj = val["box"];
                if (!bj.is_array() || static_cast<int>(bj.size()) != cfg.ambient_dim) {
                    fail(rp + ".box", "expected one [lo, hi] pair per coordinate");
                }
                for (std::size_t k = 0; k < bj.size(); ++k) {
                    const Vector lh = as_vector(bj[k], rp + ".box[" + std::to_string(k) + "]");
                    if (lh.size() != 2 || !(lh(0) <= lh(1))) {
                        fail(rp + ".box[" + std::to_string(k) + "]", "expected [lo, hi] with lo <= hi");
                    }
                    decl.box.emplace_back(lh(0), lh(1));
                }
            }
            cfg.regions[id] = decl;
        }
    }

    if (pj.contains("regularizer")) {
        const std::string rp = path + ".regularizer";
        const json& rj = require_object(pj["regularizer"], rp);
        reject_unknown(rj, rp, {"within_view", "between_view", "sigma_graph", "epsilon", "normalized", "gamma_B",
                                "gamma_W"});
        RegularizerRecipe& r = cfg.regularizer;
        if (rj.contains("within_view")) r.within_view = as_bool(rj["within_view"], rp + ".within_view");
        if (rj.contains("between_view")) {
            const json& bj = require_object(rj["between_view"], rp + ".between_view");
            reject_unknown(bj, rp + ".between_view", {"views", "dim_y"});
            BetweenViewRecipe b;
            b.views = as_int(require(bj, "views", rp + ".between_view"), rp + ".between_view.views");
            if (bj.contains("dim_y")) b.dim_y = as_int(bj["dim_y"], rp + ".between_view.dim_y");
            if (b.views < 1 || b.dim_y < 1) fail(rp + ".between_view", "views and dim_y must be >= 1");
            r.between_view = b;
        }
        if (rj.contains("sigma_graph") && !rj["sigma_graph"].is_null()) {
            r.sigma_graph = as_real(rj["sigma_graph"], rp + ".sigma_graph");
            if (!(*r.sigma_graph > 0.0)) fail(rp + ".sigma_graph", "must be > 0");
        }
        if (rj.contains("epsilon") && !rj["epsilon"].is_null()) {
            r.epsilon = as_real(rj["epsilon"], rp + ".epsilon");
            if (!(*r.epsilon > 0.0)) fail(rp + ".epsilon", "must be > 0");
        }
        if (rj.contains("normalized")) r.normalized = as_bool(rj["normalized"], rp + ".normalized");
        if (rj.contains("gamma_B") && !rj["gamma_B"].is_null()) r.gamma_B = as_real(rj["gamma_B"], rp + ".gamma_B");
        if (rj.contains("gamma_W") && !rj["gamma_W"].is_null()) r.gamma_W = as_real(rj["gamma_W"], rp + ".gamma_W");
        if (r.gamma_B && !(*r.gamma_B >= 0.0)) fail(rp + ".gamma_B", "must be >= 0");
        if (r.gamma_W && !(*r.gamma_W >= 0.0)) fail(rp + ".gamma_W", "must be >= 0");
        if (r.gamma_B && !r.between_view) fail(rp + ".gamma_B", "set without between_view");
    }
}

void parse_solve(const json& sj, SolveConfig& s)
{
    const std::string path = "solve";
    require_object(sj, path);
    reject_unknown(sj, path, {"mode", "inner", "lhs_count", "seed", "max_iters", "tol_opt", "tol_step", "damping_init",
                              "armijo_c", "backtrack", "threads"});
    try {
        if (sj.contains("mode")) s.mode = solve_mode_from_string(as_string(sj["mode"], path + ".mode"));
        if (sj.contains("inner")) s.inner = inner_objective_from_string(as_string(sj["inner"], path + ".inner"));
    } catch (const ValidationError& e) {
        if (std::string(e.what()).rfind(path, 0) == 0) throw;
        fail(path, e.what());
    }
    if (sj.contains("lhs_count")) s.lhs_count = as_int(sj["lhs_count"], path + ".lhs_count");
    if (sj.contains("seed")) {
        const json& v = sj["seed"];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(path + ".seed", "expected a non-negative integer");
        }
        s.seed = v.get<std::uint64_t>();
    }
    if (sj.contains("max_iters")) s.max_iters = as_int(sj["max_iters"], path + ".max_iters");
    if (sj.contains("tol_opt")) s.tol_opt = as_real(sj["tol_opt"], path + ".tol_opt");
    if (sj.contains("tol_step")) s.tol_step = as_real(sj["tol_step"], path + ".tol_step");
    if (sj.contains("damping_init")) s.damping_init = as_real(sj["damping_init"], path + ".damping_init");
    if (sj.contains("armijo_c")) s.armijo_c = as_real(sj["armijo_c"], path + ".armijo_c");
    if (sj.contains("backtrack")) s.backtrack = as_real(sj["backtrack"], path + ".backtrack");
    if (sj.contains("threads")) s.threads = as_int(sj["threads"], path + ".threads");
    s.validate();
}

void parse_outputs(const json& oj, OutputSpec& o)
{
    const std::string path = "outputs";
    require_object(oj, path);
    reject_unknown(oj, path, {"report", "trace", "mesh_prefix", "meshes"});
    if (oj.contains("report")) o.report = as_string(oj["report"], path + ".report");
    if (oj.contains("trace")) o.trace = as_string(oj["trace"], path + ".trace");
    if (oj.contains("mesh_prefix")) o.mesh_prefix = as_string(oj["mesh_prefix"], path + ".mesh_prefix");
    if (oj.contains("meshes")) {
        const json& ms = oj["meshes"];
        if (!ms.is_array()) fail(path + ".meshes", "expected an array");
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const std::string mp = path + ".meshes[" + std::to_string(k) + "]";
            require_object(ms[k], mp);
            reject_unknown(ms[k], mp, {"region", "grid", "component"});
            MeshRequest m;
            m.region = as_int(require(ms[k], "region", mp), mp + ".region");
            if (ms[k].contains("grid")) m.grid = as_int(ms[k]["grid"], mp + ".grid");
            if (ms[k].contains("component")) m.component = as_int(ms[k]["component"], mp + ".component");
            if (m.grid < 1) fail(mp + ".grid", "must be >= 1");
            if (m.component < 0) fail(mp + ".component", "must be >= 0");
            o.meshes.push_back(m);
        }
    }
}

void check_meshes(const RunConfig& cfg)
{
    for (std::size_t k = 0; k < cfg.outputs.meshes.size(); ++k) {
        const MeshRequest& m = cfg.outputs.meshes[k];
        const std::string mp = "outputs.meshes[" + std::to_string(k) + "]";
        auto it = cfg.regions.find(m.region);
        if (it == cfg.regions.end()) fail(mp + ".region", "region " + std::to_string(m.region) + " is not declared");
        if (it->second.box.empty()) fail(mp + ".region", "region " + std::to_string(m.region) + " has no box");
        if (cfg.ambient_dim != 2) fail(mp, "meshes need two-dimensional points");
        if (m.component >= it->second.dim) {
            fail(mp + ".component", "region " + std::to_string(m.region) + " has output dimension " +
                                        std::to_string(it->second.dim));
        }
    }
}

// ---- serialization with 17 significant digits ------------------------------

void emit(const ojson& v, std::string& out, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string pad_close(static_cast<std::size_t>(indent * depth), ' ');
    switch (v.type()) {
    case ojson::value_t::null: out += "null"; break;
    case ojson::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case ojson::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case ojson::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case ojson::value_t::number_float: {
        const double x = v.get<double>();
        out += std::isfinite(x) ? format_real(x) : "null";
        break;
    }
    case ojson::value_t::string: out += v.dump(); break;
    case ojson::value_t::array: {
        bool flat = true;
        for (const auto& e : v) flat = flat && !e.is_structured();
        if (v.empty()) {
            out += "[]";
        } else if (flat) {
            out += "[";
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) out += ", ";
                emit(v[k], out, indent, depth + 1);
            }
            out += "]";
        } else {
            out += "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
                out += pad;
                emit(v[k], out, indent, depth + 1);
                out += k + 1 < v.size() ? ",\n" : "\n";
            }
            out += pad_close + "]";
        }
        break;
    }
    case ojson::value_t::object: {
        if (v.empty()) {
            out += "{}";
            break;
        }
        out += "{\n";
        std::size_t k = 0;
        for (const auto& [key, val] : v.items()) {
            out += pad + ojson(key).dump() + ": ";
            emit(val, out, indent, depth + 1);
            out += ++k < v.size() ? ",\n" : "\n";
        }
        out += pad_close + "}";
        break;
    }
    default: out += v.dump(); break;
    }
}

std::string dump17(const ojson& v)
{
    std::string out;
    emit(v, out, 2, 0);
    out += "\n";
    return out;
}

ojson vec_json(const Vector& v)
{
    ojson a = ojson::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
    return a;
}

ojson mat_json(const Matrix& m)
{
    ojson a = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
    return a;
}

}  // namespace

// ---- files ---------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---- config --------------------------------------------------------------------

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    require_object(root, "config");
    reject_unknown(root, "config", {"problem", "solve", "outputs"});
    RunConfig cfg;
    parse_problem(require(root, "problem", "config"), base_dir, cfg);
    // mode follows the loss unless stated
    if (cfg.loss == LossKind::LeastSquares) cfg.solve.mode = SolveMode::LeastSquares;
    if (root.contains("solve")) parse_solve(root["solve"], cfg.solve);
    if (root.contains("outputs")) parse_outputs(root["outputs"], cfg.outputs);
    check_meshes(cfg);
    return cfg;
}

RunConfig read_config(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ValidationError(e.what());
    }
    return parse_config(text, path.parent_path());
}

std::string write_config(const RunConfig& cfg)
{
    ojson p;
    p["ambient_dim"] = cfg.ambient_dim;
    ojson pts = ojson::array();
    for (const auto& x : cfg.points) pts.push_back(vec_json(x));
    p["points"] = pts;
    ojson labels = ojson::array();
    for (const auto& y : cfg.labels) labels.push_back(vec_json(y));
    p["labels"] = labels;
    if (!cfg.point_regions.empty()) p["point_regions"] = cfg.point_regions;
    if (!cfg.dims.empty()) p["dims"] = cfg.dims;
    if (!cfg.label_dims.empty()) p["label_dims"] = cfg.label_dims;
    if (!cfg.combination.empty()) {
        ojson cs = ojson::array();
        for (const auto& c : cfg.combination) cs.push_back(mat_json(c));
        p["combination"] = cs;
    }
    p["loss"] = std::string(to_string(cfg.loss));
    p["gamma_A"] = cfg.gamma_A;
    p["gamma_I"] = cfg.gamma_I;
    p["kernel"] = {{"kind", std::string(kernel_kind_name(cfg.kernel.kind))},
                   {"sigma", cfg.kernel.sigma},
                   {"alpha", cfg.kernel.alpha}};
    if (!cfg.regions.empty()) {
        ojson rs = ojson::object();
        for (const auto& [id, decl] : cfg.regions) {
            ojson d;
            d["dim"] = decl.dim;
            if (!decl.box.empty()) {
                ojson box = ojson::array();
                for (const auto& [lo, hi] : decl.box) box.push_back(ojson::array({lo, hi}));
                d["box"] = box;
            }
            rs[std::to_string(id)] = d;
        }
        p["regions"] = rs;
    }
    const RegularizerRecipe& r = cfg.regularizer;
    ojson rj;
    rj["within_view"] = r.within_view;
    if (r.between_view) rj["between_view"] = {{"views", r.between_view->views}, {"dim_y", r.between_view->dim_y}};
    if (r.sigma_graph) rj["sigma_graph"] = *r.sigma_graph;
    if (r.epsilon) rj["epsilon"] = *r.epsilon;
    rj["normalized"] = r.normalized;
    if (r.gamma_B) rj["gamma_B"] = *r.gamma_B;
    if (r.gamma_W) rj["gamma_W"] = *r.gamma_W;
    p["regularizer"] = rj;

    const SolveConfig& s = cfg.solve;
    ojson sj;
    sj["mode"] = std::string(to_string(s.mode));
    sj["inner"] = std::string(to_string(s.inner));
    sj["lhs_count"] = s.lhs_count;
    sj["seed"] = s.seed;
    sj["max_iters"] = s.max_iters;
    sj["tol_opt"] = s.tol_opt;
    sj["tol_step"] = s.tol_step;
    sj["damping_init"] = s.damping_init;
    sj["armijo_c"] = s.armijo_c;
    sj["backtrack"] = s.backtrack;
    sj["threads"] = s.threads;

    ojson oj;
    oj["report"] = cfg.outputs.report;
    oj["trace"] = cfg.outputs.trace;
    oj["mesh_prefix"] = cfg.outputs.mesh_prefix;
    ojson ms = ojson::array();
    for (const auto& m : cfg.outputs.meshes) {
        ms.push_back({{"region", m.region}, {"grid", m.grid}, {"component", m.component}});
    }
    oj["meshes"] = ms;

    ojson root;
    root["problem"] = p;
    root["solve"] = sj;
    root["outputs"] = oj;
    return dump17(root);
}

SpaceDims resolve_dims(const RunConfig& cfg)
{
    const std::size_t n = cfg.points.size();
    std::vector<int> d;
    if (!cfg.point_regions.empty() && cfg.point_regions.size() != n) {
        fail("problem.point_regions", "has " + std::to_string(cfg.point_regions.size()) + " entries for " +
                                          std::to_string(n) + " points");
    }
    if (!cfg.dims.empty()) {
        if (cfg.dims.size() != n) fail("problem.dims", "has " + std::to_string(cfg.dims.size()) + " entries for " +
                                                           std::to_string(n) + " points");
        d = cfg.dims;
    } else if (!cfg.point_regions.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            const int reg = cfg.point_regions[i];
            auto it = cfg.regions.find(reg);
            if (it != cfg.regions.end()) {
                d.push_back(it->second.dim);
            } else if (cfg.kernel.kind == KernelKind::ToyBlock && (reg == 1 || reg == 2)) {
                d.push_back(reg);
            } else {
                fail("problem.point_regions[" + std::to_string(i) + "]",
                     "region " + std::to_string(reg) + " is not declared");
            }
        }
    } else {
        d.assign(n, 1);
    }
    std::vector<int> e = cfg.label_dims.empty() ? d : cfg.label_dims;
    if (e.size() != n) fail("problem.label_dims", "has " + std::to_string(e.size()) + " entries for " +
                                                      std::to_string(n) + " points");
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] < 1) fail("problem.dims[" + std::to_string(i) + "]", "must be >= 1");
        if (e[i] < 1) fail("problem.label_dims[" + std::to_string(i) + "]", "must be >= 1");
    }
    return SpaceDims(std::move(d), std::move(e));
}

std::vector<InputPoint> resolve_points(const RunConfig& cfg)
{
    std::vector<InputPoint> pts;
    pts.reserve(cfg.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        InputPoint x{cfg.points[i], cfg.point_regions.empty() ? 0 : cfg.point_regions[i]};
        auto it = cfg.regions.find(x.region);
        if (it != cfg.regions.end() && !it->second.box.empty()) {
            for (Eigen::Index k = 0; k < x.coords.size(); ++k) {
                const auto [lo, hi] = it->second.box[static_cast<std::size_t>(k)];
                if (x.coords(k) < lo || x.coords(k) > hi) {
                    fail("problem.points[" + std::to_string(i) + "]",
                         "lies outside the box of region " + std::to_string(x.region));
                }
            }
        }
        pts.push_back(std::move(x));
    }
    if (cfg.kernel.kind == KernelKind::ToyBlock) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].region != 1 && pts[i].region != 2) {
                fail("problem.point_regions[" + std::to_string(i) + "]", "toy-block kernel needs region 1 or 2");
            }
        }
    }
    return pts;
}

RegularizerParts build_regularizer(const RunConfig& cfg)
{
    const SpaceDims dims = resolve_dims(cfg);
    const std::vector<InputPoint> pts = resolve_points(cfg);
    const RegularizerRecipe& r = cfg.regularizer;
    RegularizerParts parts;
    parts.combined = RegularizerOperator{Matrix::Zero(dims.total(), dims.total()), dims};
    if (cfg.gamma_I == 0.0 || (!r.within_view && !r.between_view)) return parts;

    if (r.within_view) {
        parts.weights = gaussian_weights(pts, r.sigma_graph.value_or(cfg.kernel.sigma), r.epsilon);
        parts.laplacian = graph_laplacian(*parts.weights, r.normalized);
        parts.within = within_view_embed(*parts.laplacian, dims);
    }
    if (r.between_view) {
        const int per_point = r.between_view->views * r.between_view->dim_y;
        for (std::size_t i = 0; i < dims.count(); ++i) {
            if (dims.dim(i) != per_point) {
                fail("problem.regularizer.between_view",
                     "needs every point to have dimension views*dim_y = " + std::to_string(per_point) +
                         "; point " + std::to_string(i) + " has " + std::to_string(dims.dim(i)));
            }
        }
        parts.between = between_view_operator(r.between_view->views, r.between_view->dim_y,
                                              static_cast<int>(dims.count()));
        parts.between->layout = dims;
    }
    RegularizerConfig rc;
    rc.gamma_I = cfg.gamma_I;
    rc.gamma_B = r.gamma_B.value_or(0.0);
    rc.gamma_W = r.gamma_W.value_or(cfg.gamma_I);
    rc.sigma_graph = r.sigma_graph.value_or(cfg.kernel.sigma);
    rc.epsilon_neighbor = r.epsilon;
    rc.normalized = r.normalized;
    parts.combined = combine_regularizer(rc, parts.between, parts.within);
    const PsdCheck psd = check_psd(parts.combined.M);
    if (!psd.is_psd) {
        throw NumericalError("problem.regularizer: assembled M is not positive semidefinite (min eigenvalue " +
                             format_real(psd.min_eig) + ")");
    }
    return parts;
}

ProblemSpec build_problem(const RunConfig& cfg)
{
    ProblemData data;
    data.dims = resolve_dims(cfg);
    data.points = resolve_points(cfg);
    data.labels = cfg.labels;
    data.C = cfg.combination;
    data.M = build_regularizer(cfg).combined.M;
    data.gamma_A = cfg.gamma_A;
    data.gamma_I = cfg.gamma_I;
    data.kernel = cfg.kernel;
    data.loss = cfg.loss;
    if (cfg.solve.mode == SolveMode::LeastSquares && cfg.loss != LossKind::LeastSquares) {
        fail("solve.mode", "ls needs problem.loss = least-squares");
    }
    if (cfg.solve.mode == SolveMode::ExponentialLeastSquares && cfg.loss != LossKind::ExponentialLeastSquares) {
        fail("solve.mode", "els needs problem.loss = exponential-least-squares");
    }
    try {
        return make_problem(std::move(data));
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("problem: ") + e.what());
    }
}

// ---- reports -------------------------------------------------------------------

std::string report_to_text(const SolveReport& r)
{
    ojson j;
    j["mode"] = std::string(to_string(r.mode));
    j["inner"] = std::string(to_string(r.inner));
    j["seed"] = r.seed;
    j["delta"] = r.delta ? ojson(*r.delta) : ojson(nullptr);
    j["objective"] = r.objective;
    j["resid_paper_inf"] = r.resid_paper_inf;
    j["grad_inf"] = r.grad_inf;
    j["optimality"] = r.optimality;
    j["starts_run"] = r.starts_run;
    j["admissible_count"] = r.admissible_count;
    j["trivial"] = r.trivial;
    j["no_admissible"] = r.no_admissible;
    j["best_a"] = vec_json(r.best_a);
    ojson starts = ojson::array();
    for (const auto& s : r.per_start) {
        ojson sj;
        sj["start_index"] = s.start_index;
        sj["a0"] = vec_json(s.a0);
        sj["final_objective"] = s.final_objective;
        sj["final_grad_inf"] = s.final_grad_inf;
        sj["final_optimality"] = s.final_optimality;
        sj["final_resid_inf"] = s.final_resid_inf;
        sj["iters"] = s.iters;
        sj["converged"] = s.converged;
        sj["admissible"] = s.admissible;
        starts.push_back(sj);
    }
    j["per_start"] = starts;
    return dump17(j);
}

SolveReport report_from_text(std::string_view text)
{
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("report parse error: ") + e.what());
    }
    const std::string path = "report";
    require_object(j, path);
    SolveReport r;
    r.mode = solve_mode_from_string(as_string(require(j, "mode", path), path + ".mode"));
    if (j.contains("inner")) r.inner = inner_objective_from_string(as_string(j["inner"], path + ".inner"));
    if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("delta") && !j["delta"].is_null()) r.delta = as_real(j["delta"], path + ".delta");
    r.best_a = as_vector(require(j, "best_a", path), path + ".best_a");
    auto real_or_nan = [&](const char* key) {
        if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
        return as_real(j[key], path + "." + key);
    };
    r.objective = real_or_nan("objective");
    r.resid_paper_inf = real_or_nan("resid_paper_inf");
    r.grad_inf = real_or_nan("grad_inf");
    r.optimality = real_or_nan("optimality");
    if (j.contains("starts_run")) r.starts_run = as_int(j["starts_run"], path + ".starts_run");
    if (j.contains("admissible_count")) r.admissible_count = as_int(j["admissible_count"], path + ".admissible_count");
    if (j.contains("trivial")) r.trivial = as_bool(j["trivial"], path + ".trivial");
    if (j.contains("no_admissible")) r.no_admissible = as_bool(j["no_admissible"], path + ".no_admissible");
    return r;
}

std::string trace_to_csv(const SolveReport& r)
{
    std::string out = "start_index,iter,objective,grad_inf\n";
    for (const auto& s : r.per_start) {
        for (const auto& t : s.trace) {
            out += std::to_string(s.start_index) + "," + std::to_string(t.iter) + "," + format_real(t.objective) +
                   "," + format_real(t.grad_inf) + "\n";
        }
    }
    return out;
}

std::string check_diagnostics(const RunConfig& cfg, const ProblemSpec& spec)
{
    ojson j;
    const PsdCheck g = check_psd(spec.gram.data);
    j["gram"] = {{"size", spec.N()}, {"min_eig", g.min_eig}, {"max_eig", g.max_eig}, {"is_psd", g.is_psd}};
    j["kolmogorov_rank"] = kolmogorov_factor(spec.gram).rank;
    const PsdCheck m = check_psd(spec.M.M);
    j["regularizer"] = {{"min_eig", m.min_eig}, {"max_eig", m.max_eig}, {"is_psd", m.is_psd}};
    const RegularizerParts parts = build_regularizer(cfg);
    if (parts.laplacian) {
        const Matrix& L = parts.laplacian->L;
        const PsdCheck lp = check_psd(L);
        j["laplacian"] = {{"normalized", parts.laplacian->normalized},
                          {"max_abs_row_sum", L.rowwise().sum().cwiseAbs().maxCoeff()},
                          {"min_eig", lp.min_eig},
                          {"is_psd", lp.is_psd}};
    }
    if (spec.loss == LossKind::ExponentialLeastSquares) {
        try {
            const DeltaBound db = delta_bound(spec);
            j["delta"] = {{"delta", db.delta},
                          {"lambda_min", db.lambda_min},
                          {"objective_at_zero", db.objective_at_zero},
                          {"trivial", db.trivial}};
        } catch (const Error& e) {
            j["delta"] = {{"error", e.what()}};
        }
    }
    return dump17(j);
}

std::vector<MeshData> render_meshes(const RunConfig& cfg, const ProblemSpec& spec, const CoefficientVector& a)
{
    if (a.size() != spec.N()) {
        throw ValidationError("coefficients have length " + std::to_string(a.size()) + ", problem has N=" +
                              std::to_string(spec.N()));
    }
    check_meshes(cfg);
    std::vector<MeshData> out;
    for (const MeshRequest& m : cfg.outputs.meshes) {
        const RegionDecl& decl = cfg.regions.at(m.region);
        const auto [x_lo, x_hi] = decl.box[0];
        const auto [y_lo, y_hi] = decl.box[1];
        auto coord = [&](double lo, double hi, int k) {
            return m.grid == 1 ? lo : lo + (hi - lo) * k / (m.grid - 1);
        };
        MeshData md;
        md.request = m;
        md.filename = cfg.outputs.mesh_prefix + "_region" + std::to_string(m.region) + "_c" +
                      std::to_string(m.component) + ".csv";
        md.csv = "coord1,coord2,value\n";
        InputPoint x{Vector(2), m.region};
        for (int iy = 0; iy < m.grid; ++iy) {
            for (int ix = 0; ix < m.grid; ++ix) {
                x.coords << coord(x_lo, x_hi, ix), coord(y_lo, y_hi, iy);
                const Vector f = evaluate_section(a, spec.points, spec.dims, spec.kernel, x, decl.dim);
                md.csv += format_real(x.coords(0)) + "," + format_real(x.coords(1)) + "," +
                          format_real(f(m.component)) + "\n";
            }
        }
        out.push_back(std::move(md));
    }
    return out;
}

std::vector<std::filesystem::path> write_meshes(const RunConfig& cfg, const ProblemSpec& spec,
                                                const CoefficientVector& a, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    for (const MeshData& m : render_meshes(cfg, spec, a)) {
        written.push_back(out_dir / m.filename);
        write_text_file(written.back(), m.csv);
    }
    return written;
}

std::vector<std::filesystem::path> write_outputs(const RunConfig& cfg, const ProblemSpec& spec,
                                                 const SolveReport& report, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    written.push_back(out_dir / cfg.outputs.report);
    write_text_file(written.back(), report_to_text(report));
    written.push_back(out_dir / cfg.outputs.trace);
    write_text_file(written.back(), trace_to_csv(report));
    for (auto& p : write_meshes(cfg, spec, report.best_a, out_dir)) written.push_back(std::move(p));
    return written;
}

}  // namespace mvkl
