#include "doctest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dcc/config.hpp"
#include "dcc/report.hpp"

using namespace dcc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "schema": "dcc-lab/1",
  "model": {
    "scalar": {
      "m": 2,
      "a": [0.8],
      "b": [0.1],
      "m_coefs_squared": [0.999],
      "n_coefs_squared": [3],
      "v0": 0.25,
      "W0": [[1.0, 0.5], [0.5, 1.0]]
    }
  }
}
)";

ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError("", 0, "");
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dcc_lab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config and declared defaults") {
    const RunConfig cfg = parse_config(kMinimal);
    const DccSpec ref = reference_bivariate_spec(0.999);
    CHECK(cfg.model.W0 == ref.W0);
    CHECK(cfg.model.M[0] == ref.M[0]);
    CHECK(cfg.model.N[0] == ref.N[0]);
    CHECK(cfg.innovations.family == InnovationFamily::Gaussian);
    CHECK(cfg.sim.Q0 == Matrix::Identity(2, 2));
    CHECK(cfg.sim.h0 == Vector::Constant(2, 0.5));
    CHECK(cfg.checks.norm == NormKind::InducedInf);
    CHECK(cfg.experiment.m_squared == std::vector<double>{0.999, 1.001});
    CHECK(cfg.experiment.n_squared == 3.0);
    REQUIRE(cfg.experiment.innovations.size() == 5);
    CHECK(cfg.experiment.innovations[1].dof == 1.2);
    CHECK(cfg.experiment.innovations[1].standardization == Standardization::UnitScale);
    CHECK(cfg.experiment.innovations[3].standardization == Standardization::UnitVariance);
    CHECK(cfg.output.wants("csv"));
}

TEST_CASE("serialization round trip") {
    RunConfig cfg = parse_config(kMinimal);
    cfg.innovations.family = InnovationFamily::StudentT;
    cfg.innovations.dof = 4.5;
    cfg.innovations.seed = 18446744073709551557ULL;
    cfg.sim.stride = 7;
    cfg.sim.explode_threshold = 1.0 / 3.0 * 1e9;
    cfg.checks.norm = NormKind::Spectral;
    cfg.checks.require_uniqueness = true;
    cfg.output.formats = {"json"};
    const std::string text = serialize_config(cfg);
    const RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.innovations.seed == cfg.innovations.seed);
    CHECK(back.sim.explode_threshold == cfg.sim.explode_threshold);
    CHECK(back.checks.norm == NormKind::Spectral);
    CHECK_FALSE(back.output.wants("csv"));
    CHECK(text.back() == '\n');
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("config errors carry field and line") {
    SUBCASE("unknown key") {
        const auto e = parse_error(replace(kMinimal, "\"v0\": 0.25,", "\"v0\": 0.25, \"colour\": 1,"));
        CHECK(e.field() == "model.scalar.colour");
        CHECK(e.line() == 10);
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
    SUBCASE("unknown top-level section") {
        const auto e = parse_error(replace(kMinimal, "\"schema\"", "\"extras\": {}, \"schema\""));
        CHECK(e.field() == "extras");
        CHECK(e.line() == 2);
    }
    SUBCASE("missing W0") {
        const auto e = parse_error(replace(kMinimal, ",\n      \"W0\": [[1.0, 0.5], [0.5, 1.0]]", ""));
        CHECK(e.field() == "model.scalar.W0");
        CHECK(e.line() > 0);
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }
    SUBCASE("W0 not positive definite") {
        const auto e = parse_error(replace(kMinimal, "[[1.0, 0.5], [0.5, 1.0]]", "[[1.0, 2.0], [2.0, 1.0]]"));
        CHECK(e.field().find("W0") != std::string::npos);
        CHECK(e.line() == 11);
    }
    SUBCASE("wrong schema") {
        const auto e = parse_error(replace(kMinimal, "dcc-lab/1", "dcc-lab/0"));
        CHECK(e.field() == "schema");
        CHECK(e.line() == 2);
    }
    SUBCASE("both coefficient forms") {
        const auto e = parse_error(replace(kMinimal, "\"m_coefs_squared\": [0.999],", "\"m_coefs_squared\": [0.999], \"m_coefs\": [0.9],"));
        CHECK(e.field().find("m_coefs") != std::string::npos);
    }
    SUBCASE("syntax error") {
        const auto e = parse_error(replace(kMinimal, "\"b\": [0.1],", "\"b\": [0.1]"));
        CHECK(e.field() == "<syntax>");
        CHECK(e.line() == 8);
    }
    SUBCASE("type errors") {
        const auto e = parse_error(replace(kMinimal, "\"v0\": 0.25", "\"v0\": \"quarter\""));
        CHECK(e.field() == "model.scalar.v0");
        const std::string with_sim = replace(kMinimal, "\"model\"", "\"sim\": {\"stride\": -1}, \"model\"");
        CHECK(parse_error(with_sim).field() == "sim.stride");
    }
    SUBCASE("unit variance with heavy tails") {
        const std::string t = replace(kMinimal, "\"model\"",
                                      "\"innovations\": {\"family\": \"student_t\", \"dof\": 1.5, "
                                      "\"standardization\": \"unit_variance\"}, \"model\"");
        CHECK(parse_error(t).field() == "innovations.dof");
        const std::string ok = replace(kMinimal, "\"model\"",
                                       "\"innovations\": {\"family\": \"student_t\", \"dof\": 1.5}, \"model\"");
        CHECK(parse_config(ok).innovations.standardization == Standardization::UnitScale);
    }
}

TEST_CASE("load_config reports unreadable files as I/O errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.json"), IoError);
    const fs::path dir = scratch_dir("load");
    write_atomic(dir / "c.json", kMinimal);
    CHECK(load_config(dir / "c.json").model.m == 2);
}

TEST_CASE("shortest round-trip numbers") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.9) == "0.9");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::sqrt(0.999) * std::sqrt(0.999)) == "0.9990000000000001");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t b = bits(rng);
        double x;
        std::memcpy(&x, &b, sizeof x);
        if (!std::isfinite(x)) continue;
        const std::string s = format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
    }
}

TEST_CASE("trajectory CSV") {
    const DccSpec spec = reference_bivariate_spec(0.999);
    SimConfig cfg = SimConfig::reference(2, 50);
    cfg.stride = 10;
    InnovationSpec g;
    g.seed = 4;
    const Trajectory tr = simulate(spec, cfg, g);
    const std::string csv = trajectory_csv(tr, 2);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,z_1,z_2,h_1,h_2,Q_1_1,Q_2_1,Q_2_2,R_1_1,R_2_1,R_2_2");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 10);
    }
    CHECK(rows == 5);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.back() == '\n');
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n11,") != std::string::npos);
}

TEST_CASE("atomic writes") {
    const fs::path dir = scratch_dir("atomic");
    const fs::path p = dir / "out.txt";
    write_atomic(p, "first\n");
    CHECK(slurp(p) == "first\n");
    write_atomic(p, "second\n");
    CHECK(slurp(p) == "second\n");
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
    write_atomic(dir / "nested" / "x.txt", "x\n");
    CHECK(slurp(dir / "nested" / "x.txt") == "x\n");
    // A regular file cannot act as a directory.
    CHECK_THROWS_AS(write_atomic(p / "x.txt", "x"), IoError);
}

TEST_CASE("report serialization") {
    McSettings mc;
    mc.horizon = 1000;
    mc.replications = 2;
    mc.samples = 1000;
    InnovationSpec g;
    const auto rep = full_report(reference_bivariate_spec(0.999), g, mc);
    const auto j = to_json(rep);
    CHECK(j.at("existence").at("pass") == true);
    CHECK(j.at("existence").at("norm_sums").at("correlation_sum").get<double>() == rep.existence.norm_sums.corr_sum);
    CHECK(j.at("uniqueness").at("pass") == false);
    CHECK(j.at("constants").at("c_lambda").get<double>() == rep.constants.c_lambda);
    const std::string text = to_text(rep);
    CHECK(text.find("not established") != std::string::npos);
    CHECK(text.find("0.9990000000000001") != std::string::npos);

    const auto bad = full_report(reference_bivariate_spec(1.001), g, mc);
    CHECK(to_text(bad).find("no sufficient condition satisfied") != std::string::npos);
    CHECK(to_json(bad).at("existence").at("pass") == false);
}
