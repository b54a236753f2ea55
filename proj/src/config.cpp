#include "dcc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/core.h>
#include "json.hpp"

namespace dcc {

using nlohmann::json;

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      field_(std::move(field)),
      line_(line) {}

bool OutputSettings::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::vector<InnovationSpec> default_experiment_innovations() {
    std::vector<InnovationSpec> out(1);
    for (double dof : {1.2, 1.5, 2.5, 4.0}) {
        InnovationSpec s;
        s.family = InnovationFamily::StudentT;
        s.dof = dof;
        s.standardization = dof > 2.0 ? Standardization::UnitVariance : Standardization::UnitScale;
        out.push_back(s);
    }
    return out;
}

namespace {

// Dotted field path plus the JSON keys used to find its line in the source text.
class Path {
public:
    Path() = default;
    Path key(const std::string& k) const {
        Path p = *this;
        p.text_ += (p.text_.empty() ? "" : ".") + k;
        p.keys_.push_back(k);
        return p;
    }
    Path index(std::size_t i) const {
        Path p = *this;
        p.text_ += fmt::format("[{}]", i);
        return p;
    }
    const std::string& str() const { return text_; }
    const std::vector<std::string>& keys() const { return keys_; }

private:
    std::string text_;
    std::vector<std::string> keys_;
};

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const Path& path, const std::string& msg) const {
        throw ConfigError(path.str().empty() ? "<root>" : path.str(), line_of(path), msg);
    }

    std::size_t line_of(const Path& path) const {
        std::size_t pos = 0;
        bool found = false;
        for (const auto& k : path.keys()) {
            const auto at = text_.find("\"" + k + "\"", pos);
            if (at == std::string::npos) break;
            pos = at;
            found = true;
        }
        if (!found) return 0;
        return static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n')) + 1;
    }

    void check_keys(const json& obj, const Path& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [k, v] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
                std::string list;
                for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
                fail(path.key(k), fmt::format("unknown key (allowed: {})", list));
            }
        }
    }

    const json& require(const json& obj, const Path& path, const char* key) const {
        if (!obj.contains(key)) fail(path.key(key), "missing required field");
        return obj.at(key);
    }

    double number(const json& v, const Path& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::uint64_t unsigned_int(const json& v, const Path& path) const {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) {
            if (v.get<std::int64_t>() < 0) fail(path, "expected a nonnegative integer");
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        fail(path, "expected a nonnegative integer");
    }

    std::size_t count(const json& v, const Path& path) const {
        return static_cast<std::size_t>(unsigned_int(v, path));
    }

    bool boolean(const json& v, const Path& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const json& v, const Path& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const json& v, const Path& path) const {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path.index(i)));
        return out;
    }

    Vector vector(const json& v, const Path& path) const {
        const auto xs = numbers(v, path);
        return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    }

    Matrix matrix(const json& v, const Path& path) const {
        if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
        const std::size_t rows = v.size();
        std::size_t cols = 0;
        Matrix out;
        for (std::size_t i = 0; i < rows; ++i) {
            const auto row = numbers(v[i], path.index(i));
            if (i == 0) {
                cols = row.size();
                if (cols == 0) fail(path.index(0), "empty row");
                out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            } else if (row.size() != cols) {
                fail(path.index(i), fmt::format("row has {} entries, expected {}", row.size(), cols));
            }
            for (std::size_t j = 0; j < cols; ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        return out;
    }

    std::vector<Matrix> matrices(const json& v, const Path& path) const {
        if (!v.is_array()) fail(path, "expected an array of matrices");
        std::vector<Matrix> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(matrix(v[i], path.index(i)));
        return out;
    }

private:
    const std::string& text_;
};

// "A[0]" -> "A"
std::string field_base(const std::string& field) { return field.substr(0, field.find('[')); }

void check_model(const Reader& rd, const DccSpec& spec, const Path& path) {
    const ValidationReport rep = validate(spec);
    if (rep.ok()) return;
    const auto& first = rep.issues.front();
    std::string msg = first.message;
    if (rep.issues.size() > 1) msg += fmt::format(" (and {} more: {})", rep.issues.size() - 1,
                                                  rep.to_string());
    throw ConfigError(path.str() + "." + first.field, rd.line_of(path.key(field_base(first.field))), msg);
}

DccSpec parse_scalar_model(const Reader& rd, const json& j, const Path& path) {
    rd.check_keys(j, path, {"m", "a", "b", "m_coefs", "m_coefs_squared", "n_coefs",
                            "n_coefs_squared", "v0", "W0"});
    const std::size_t m = rd.count(rd.require(j, path, "m"), path.key("m"));
    if (m == 0) rd.fail(path.key("m"), "must be positive");
    auto coefs = [&](const char* plain, const char* squared) {
        const bool has_plain = j.contains(plain);
        const bool has_sq = j.contains(squared);
        if (has_plain == has_sq) {
            rd.fail(path.key(plain), fmt::format("give exactly one of {} and {}", plain, squared));
        }
        if (has_plain) return rd.numbers(j.at(plain), path.key(plain));
        auto sq = rd.numbers(j.at(squared), path.key(squared));
        for (std::size_t i = 0; i < sq.size(); ++i) {
            if (sq[i] < 0.0) rd.fail(path.key(squared).index(i), "squared coefficient is negative");
            sq[i] = std::sqrt(sq[i]);
        }
        return sq;
    };
    const auto a = rd.numbers(rd.require(j, path, "a"), path.key("a"));
    const auto b = rd.numbers(rd.require(j, path, "b"), path.key("b"));
    const auto mc = coefs("m_coefs", "m_coefs_squared");
    const auto nc = coefs("n_coefs", "n_coefs_squared");
    const double v0 = rd.number(rd.require(j, path, "v0"), path.key("v0"));
    const Matrix w0 = rd.matrix(rd.require(j, path, "W0"), path.key("W0"));
    DccSpec spec;
    spec.m = m;
    const auto dim = static_cast<Eigen::Index>(m);
    const Matrix eye = Matrix::Identity(dim, dim);
    spec.V0 = Vector::Constant(dim, v0);
    for (double x : a) spec.A.push_back(x * eye);
    for (double x : b) spec.B.push_back(x * eye);
    for (double x : mc) spec.M.push_back(x * eye);
    for (double x : nc) spec.N.push_back(x * eye);
    spec.W0 = w0;
    // Report scalar fields under their own names.
    const ValidationReport rep = validate(spec);
    if (!rep.ok()) {
        const std::string base = field_base(rep.issues.front().field);
        const std::string key = base == "A" ? "a" : base == "B" ? "b" : base == "M" ? (j.contains("m_coefs") ? "m_coefs" : "m_coefs_squared")
                              : base == "N" ? (j.contains("n_coefs") ? "n_coefs" : "n_coefs_squared")
                              : base == "V0" ? "v0" : base;
        throw ConfigError(path.key(key).str(), rd.line_of(path.key(key)), rep.to_string());
    }
    return spec;
}

DccSpec parse_model(const Reader& rd, const json& j, const Path& path) {
    if (!j.is_object()) rd.fail(path, "expected an object");
    if (j.contains("scalar")) {
        rd.check_keys(j, path, {"scalar"});
        return parse_scalar_model(rd, j.at("scalar"), path.key("scalar"));
    }
    rd.check_keys(j, path, {"m", "V0", "A", "B", "W0", "M", "N"});
    DccSpec spec;
    spec.V0 = rd.vector(rd.require(j, path, "V0"), path.key("V0"));
    spec.m = static_cast<std::size_t>(spec.V0.size());
    if (j.contains("m")) {
        const std::size_t m = rd.count(j.at("m"), path.key("m"));
        if (m != spec.m) rd.fail(path.key("m"), fmt::format("m = {} but V0 has {} entries", m, spec.m));
    }
    spec.A = rd.matrices(rd.require(j, path, "A"), path.key("A"));
    spec.B = rd.matrices(rd.require(j, path, "B"), path.key("B"));
    spec.W0 = rd.matrix(rd.require(j, path, "W0"), path.key("W0"));
    spec.M = rd.matrices(rd.require(j, path, "M"), path.key("M"));
    spec.N = rd.matrices(rd.require(j, path, "N"), path.key("N"));
    check_model(rd, spec, path);
    return spec;
}

InnovationSpec parse_innovation_law(const Reader& rd, const json& j, const Path& path,
                                    bool allow_seed) {
    if (allow_seed) {
        rd.check_keys(j, path, {"family", "dof", "standardization", "seed", "stream"});
    } else {
        rd.check_keys(j, path, {"family", "dof", "standardization"});
    }
    InnovationSpec s;
    const std::string family = j.contains("family") ? rd.string(j.at("family"), path.key("family")) : "gaussian";
    if (family == "gaussian") {
        s.family = InnovationFamily::Gaussian;
        if (j.contains("dof")) rd.fail(path.key("dof"), "dof applies to student_t only");
    } else if (family == "student_t") {
        s.family = InnovationFamily::StudentT;
        s.dof = rd.number(rd.require(j, path, "dof"), path.key("dof"));
    } else {
        rd.fail(path.key("family"), "expected \"gaussian\" or \"student_t\"");
    }
    if (j.contains("standardization")) {
        const std::string st = rd.string(j.at("standardization"), path.key("standardization"));
        if (st == "unit_variance") {
            s.standardization = Standardization::UnitVariance;
        } else if (st == "unit_scale") {
            s.standardization = Standardization::UnitScale;
        } else {
            rd.fail(path.key("standardization"), "expected \"unit_variance\" or \"unit_scale\"");
        }
    } else if (s.family == InnovationFamily::StudentT && s.dof <= 2.0) {
        s.standardization = Standardization::UnitScale;
    }
    if (allow_seed) {
        if (j.contains("seed")) s.seed = rd.unsigned_int(j.at("seed"), path.key("seed"));
        if (j.contains("stream")) s.stream = rd.unsigned_int(j.at("stream"), path.key("stream"));
    }
    try {
        s.validate();
    } catch (const DomainError& e) {
        rd.fail(path.key("dof"), e.what());
    }
    return s;
}

SimConfig parse_sim(const Reader& rd, const json& j, const Path& path, std::size_t m) {
    SimConfig cfg = SimConfig::reference(m, 10000);
    if (j.is_null()) return cfg;
    rd.check_keys(j, path, {"horizon", "burn_in", "Q0", "h0", "explode_threshold", "stride"});
    if (j.contains("horizon")) cfg.horizon = rd.count(j.at("horizon"), path.key("horizon"));
    if (j.contains("burn_in")) cfg.burn_in = rd.count(j.at("burn_in"), path.key("burn_in"));
    if (j.contains("Q0")) cfg.Q0 = rd.matrix(j.at("Q0"), path.key("Q0"));
    if (j.contains("h0")) cfg.h0 = rd.vector(j.at("h0"), path.key("h0"));
    if (j.contains("explode_threshold"))
        cfg.explode_threshold = rd.number(j.at("explode_threshold"), path.key("explode_threshold"));
    if (j.contains("stride")) cfg.stride = rd.count(j.at("stride"), path.key("stride"));
    try {
        cfg.validate(m);
    } catch (const DomainError& e) {
        // Messages start with "sim: <field> ..."; point at that field when present.
        std::string msg = e.what();
        std::string field;
        for (const char* f : {"horizon", "burn_in", "stride", "explode_threshold", "Q0", "h0"}) {
            if (msg.find(std::string("sim: ") + f) == 0) field = f;
        }
        if (field.empty() && msg.find("SPD") != std::string::npos) field = "Q0";
        rd.fail(field.empty() ? path : path.key(field), msg);
    }
    return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset to line number.
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n')) + 1;
        throw ConfigError("<syntax>", line, e.what());
    }
    const Reader rd(text);
    const Path top;
    rd.check_keys(root, top, {"schema", "model", "innovations", "sim", "checks", "mc", "experiment", "output"});
    const std::string schema = rd.string(rd.require(root, top, "schema"), top.key("schema"));
    if (schema != kSchemaVersion) {
        rd.fail(top.key("schema"), fmt::format("unsupported schema \"{}\" (expected \"{}\")", schema, kSchemaVersion));
    }

    RunConfig cfg;
    cfg.model = parse_model(rd, rd.require(root, top, "model"), top.key("model"));
    if (root.contains("innovations"))
        cfg.innovations = parse_innovation_law(rd, root.at("innovations"), top.key("innovations"), true);
    cfg.sim = parse_sim(rd, root.contains("sim") ? root.at("sim") : json(), top.key("sim"), cfg.model.m);

    if (root.contains("checks")) {
        const Path p = top.key("checks");
        const json& j = root.at("checks");
        rd.check_keys(j, p, {"norm", "uniqueness", "require_uniqueness"});
        if (j.contains("norm")) {
            const std::string n = rd.string(j.at("norm"), p.key("norm"));
            if (n == "induced_inf") {
                cfg.checks.norm = NormKind::InducedInf;
            } else if (n == "spectral") {
                cfg.checks.norm = NormKind::Spectral;
            } else {
                rd.fail(p.key("norm"), "expected \"induced_inf\" or \"spectral\"");
            }
        }
        if (j.contains("uniqueness")) cfg.checks.uniqueness = rd.boolean(j.at("uniqueness"), p.key("uniqueness"));
        if (j.contains("require_uniqueness"))
            cfg.checks.require_uniqueness = rd.boolean(j.at("require_uniqueness"), p.key("require_uniqueness"));
    }

    if (root.contains("mc")) {
        const Path p = top.key("mc");
        const json& j = root.at("mc");
        rd.check_keys(j, p, {"horizon", "replications", "samples"});
        if (j.contains("horizon")) cfg.mc.horizon = rd.count(j.at("horizon"), p.key("horizon"));
        if (j.contains("replications")) cfg.mc.replications = rd.count(j.at("replications"), p.key("replications"));
        if (j.contains("samples")) cfg.mc.samples = rd.count(j.at("samples"), p.key("samples"));
        if (cfg.mc.horizon < 1000) rd.fail(p.key("horizon"), "must be at least 1000");
        if (cfg.mc.replications < 2) rd.fail(p.key("replications"), "must be at least 2");
        if (cfg.mc.samples < 100) rd.fail(p.key("samples"), "must be at least 100");
    }

    cfg.experiment.innovations = default_experiment_innovations();
    if (root.contains("experiment")) {
        const Path p = top.key("experiment");
        const json& j = root.at("experiment");
        rd.check_keys(j, p, {"m_squared", "n_squared", "innovations", "runs", "horizon", "burn_in"});
        auto& ex = cfg.experiment;
        if (j.contains("m_squared")) ex.m_squared = rd.numbers(j.at("m_squared"), p.key("m_squared"));
        if (j.contains("n_squared")) ex.n_squared = rd.number(j.at("n_squared"), p.key("n_squared"));
        if (j.contains("innovations")) {
            const json& arr = j.at("innovations");
            if (!arr.is_array() || arr.empty()) rd.fail(p.key("innovations"), "expected a non-empty array");
            ex.innovations.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
                ex.innovations.push_back(parse_innovation_law(rd, arr[i], p.key("innovations").index(i), false));
        }
        if (j.contains("runs")) ex.runs = rd.count(j.at("runs"), p.key("runs"));
        if (j.contains("horizon")) ex.horizon = rd.count(j.at("horizon"), p.key("horizon"));
        if (j.contains("burn_in")) ex.burn_in = rd.count(j.at("burn_in"), p.key("burn_in"));
        if (ex.m_squared.empty()) rd.fail(p.key("m_squared"), "must not be empty");
        for (std::size_t i = 0; i < ex.m_squared.size(); ++i)
            if (!(ex.m_squared[i] >= 0.0)) rd.fail(p.key("m_squared").index(i), "must be nonnegative");
        if (!(ex.n_squared >= 0.0)) rd.fail(p.key("n_squared"), "must be nonnegative");
        if (ex.runs == 0) rd.fail(p.key("runs"), "must be positive");
        if (ex.burn_in >= ex.horizon) rd.fail(p.key("burn_in"), "must be smaller than horizon");
    }

    if (root.contains("output")) {
        const Path p = top.key("output");
        const json& j = root.at("output");
        rd.check_keys(j, p, {"dir", "formats"});
        if (j.contains("dir")) cfg.output.dir = rd.string(j.at("dir"), p.key("dir"));
        if (j.contains("formats")) {
            const json& arr = j.at("formats");
            if (!arr.is_array()) rd.fail(p.key("formats"), "expected an array of strings");
            cfg.output.formats.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string f = rd.string(arr[i], p.key("formats").index(i));
                if (f != "json" && f != "text" && f != "csv")
                    rd.fail(p.key("formats").index(i), "expected \"json\", \"text\" or \"csv\"");
                cfg.output.formats.push_back(f);
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("cannot read config {}", path.string()));
    return parse_config(ss.str());
}

namespace {

json matrix_json(const Matrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(row);
    }
    return rows;
}

json matrices_json(const std::vector<Matrix>& mats) {
    json out = json::array();
    for (const auto& a : mats) out.push_back(matrix_json(a));
    return out;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json law_json(const InnovationSpec& s, bool with_seed) {
    json j;
    j["family"] = s.family == InnovationFamily::Gaussian ? "gaussian" : "student_t";
    if (s.family == InnovationFamily::StudentT) j["dof"] = s.dof;
    j["standardization"] = s.standardization == Standardization::UnitVariance ? "unit_variance" : "unit_scale";
    if (with_seed) {
        j["seed"] = s.seed;
        j["stream"] = s.stream;
    }
    return j;
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) {
    json root;
    root["schema"] = kSchemaVersion;
    const DccSpec& s = cfg.model;
    root["model"] = {{"m", s.m},          {"V0", vector_json(s.V0)}, {"A", matrices_json(s.A)},
                     {"B", matrices_json(s.B)}, {"W0", matrix_json(s.W0)}, {"M", matrices_json(s.M)},
                     {"N", matrices_json(s.N)}};
    root["innovations"] = law_json(cfg.innovations, true);
    root["sim"] = {{"horizon", cfg.sim.horizon},
                   {"burn_in", cfg.sim.burn_in},
                   {"explode_threshold", cfg.sim.explode_threshold},
                   {"stride", cfg.sim.stride}};
    // Unset initial conditions fall back to the reference values on parse.
    if (cfg.sim.Q0.size() > 0) root["sim"]["Q0"] = matrix_json(cfg.sim.Q0);
    if (cfg.sim.h0.size() > 0) root["sim"]["h0"] = vector_json(cfg.sim.h0);
    root["checks"] = {{"norm", to_string(cfg.checks.norm)},
                      {"uniqueness", cfg.checks.uniqueness},
                      {"require_uniqueness", cfg.checks.require_uniqueness}};
    root["mc"] = {{"horizon", cfg.mc.horizon},
                  {"replications", cfg.mc.replications},
                  {"samples", cfg.mc.samples}};
    json laws = json::array();
    for (const auto& law : cfg.experiment.innovations) laws.push_back(law_json(law, false));
    root["experiment"] = {{"m_squared", cfg.experiment.m_squared},
                          {"n_squared", cfg.experiment.n_squared},
                          {"runs", cfg.experiment.runs},
                          {"horizon", cfg.experiment.horizon},
                          {"burn_in", cfg.experiment.burn_in}};
    // An empty list means the declared defaults.
    if (!laws.empty()) root["experiment"]["innovations"] = laws;
    root["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
    return root.dump(2) + "\n";
}

}  // namespace dcc
