#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dcc_lab_cli_" + name);
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

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string command_line(const std::string& env, const std::string& args, const fs::path& dir) {
    std::string cmd = "env -u DCC_LAB_THREADS ";
    if (!env.empty()) cmd += env + " ";
    cmd += std::string("'") + DCC_LAB_EXE + "' " + args;
    cmd += " > '" + (dir / "stdout.txt").string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    return cmd;
}

// Runs the CLI with stdout and stderr captured in dir. Returns the exit status.
int run(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const std::string cmd = command_line(env, args, dir);
    const int raw = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(raw));
    return WEXITSTATUS(raw);
}

const std::string kStable = std::string(DCC_CONFIG_DIR) + "/s4_stable.json";
const std::string kExplosive = std::string(DCC_CONFIG_DIR) + "/s4_explosive.json";

json stable_json() { return json::parse(slurp(kStable)); }

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    spit(p, j.dump(2) + "\n");
    return p;
}

std::size_t data_rows(const std::string& csv) {
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    return lines - 1;
}

}  // namespace

TEST_CASE("check exits 0 for the stable configuration and 1 for the explosive one") {
    const fs::path dir = scratch("check");
    CHECK(run("check --config '" + kStable + "' --out '" + (dir / "a").string() + "'", dir) == 0);
    const json rep = json::parse(slurp(dir / "a" / "report.json"));
    CHECK(rep.at("existence").at("pass") == true);
    // m enters as sqrt(0.999) and the sum is its square, one ulp away at most.
    const double corr = rep.at("existence").at("norm_sums").at("correlation_sum").get<double>();
    CHECK(std::abs(corr - 0.999) <= std::nextafter(0.999, 1.0) - 0.999);
    CHECK(rep.at("config").at("schema") == "dcc-lab/1");
    CHECK(slurp(dir / "a" / "report.txt").find("correlation=0.999") != std::string::npos);
    CHECK(slurp(dir / "a" / "report.txt").find('\r') == std::string::npos);

    CHECK(run("check --config '" + kExplosive + "' --out '" + (dir / "b").string() + "'", dir) == 1);
    CHECK(json::parse(slurp(dir / "b" / "report.json")).at("existence").at("pass") == false);
}

TEST_CASE("configuration errors exit 2 with field and line") {
    const fs::path dir = scratch("config");
    SUBCASE("missing W0") {
        json j = stable_json();
        j["model"]["scalar"].erase("W0");
        const fs::path cfg = write_config(dir, j);
        CHECK(run("check --config '" + cfg.string() + "' --out '" + dir.string() + "'", dir) == 2);
        const std::string err = slurp(dir / "stderr.txt");
        CHECK(err.find("model.scalar.W0") != std::string::npos);
        CHECK(err.find("line ") != std::string::npos);
    }
    SUBCASE("unknown key") {
        json j = stable_json();
        j["sim"]["strid"] = 3;
        const fs::path cfg = write_config(dir, j);
        CHECK(run("simulate --config '" + cfg.string() + "' --out '" + dir.string() + "'", dir) == 2);
        CHECK(slurp(dir / "stderr.txt").find("sim.strid") != std::string::npos);
    }
    SUBCASE("bad command line") {
        CHECK(run("check --config '" + kStable + "' --runs many", dir) == 2);
        CHECK(run("frobnicate", dir) == 2);
    }
}

TEST_CASE("I/O errors exit 3") {
    const fs::path dir = scratch("io");
    CHECK(run("check --config '" + (dir / "absent.json").string() + "'", dir) == 3);
    spit(dir / "plain", "not a directory\n");
    CHECK(run("check --config '" + kStable + "' --out '" + (dir / "plain" / "sub").string() + "'", dir) == 3);
}

TEST_CASE("simulate writes a trajectory per retained step") {
    const fs::path dir = scratch("simulate");
    CHECK(run("simulate --config '" + kStable + "' --out '" + (dir / "s1").string() + "'", dir) == 0);
    const std::string csv = slurp(dir / "s1" / "trajectory.csv");
    CHECK(data_rows(csv) == 10000);
    CHECK(csv.find('\r') == std::string::npos);

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,z_1,z_2,h_1,h_2,Q_1_1,Q_2_1,Q_2_2,R_1_1,R_2_1,R_2_2");
    while (std::getline(in, line)) {
        const std::string r21 = line.substr(line.rfind(',', line.rfind(',') - 1) + 1);
        const double r = std::stod(r21.substr(0, r21.find(',')));
        REQUIRE(std::abs(r) <= 1.0);
    }

    json j = stable_json();
    j["sim"]["stride"] = 10;
    const fs::path cfg = write_config(dir, j);
    CHECK(run("simulate --config '" + cfg.string() + "' --out '" + (dir / "s10").string() + "'", dir) == 0);
    CHECK(data_rows(slurp(dir / "s10" / "trajectory.csv")) == 1000);
    const json summary = json::parse(slurp(dir / "s10" / "summary.json"));
    CHECK(summary.at("summary").at("steps_completed").get<std::size_t>() == 10000);
}

TEST_CASE("seed override and determinism") {
    const fs::path dir = scratch("determinism");
    const std::string base = "simulate --config '" + kStable + "' --runs 4 --out ";
    CHECK(run(base + "'" + (dir / "a").string() + "' --parallel 1", dir) == 0);
    CHECK(run(base + "'" + (dir / "b").string() + "' --parallel 3", dir) == 0);
    CHECK(run(base + "'" + (dir / "c").string() + "' --seed 99", dir) == 0);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
    CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
    json a = json::parse(slurp(dir / "a" / "summary.json"));
    json b = json::parse(slurp(dir / "b" / "summary.json"));
    CHECK(a.at("ensemble") == b.at("ensemble"));
    CHECK(json::parse(slurp(dir / "c" / "summary.json")).at("seed") == 99);
}

TEST_CASE("thread count: environment caps, flag wins") {
    const fs::path dir = scratch("threads");
    const std::string base = "simulate --config '" + kStable + "' --out '" + dir.string() + "'";
    auto threads = [&] { return json::parse(slurp(dir / "summary.json")).at("threads").get<int>(); };
    CHECK(run(base, dir, "DCC_LAB_THREADS=1") == 0);
    CHECK(threads() == 1);
    CHECK(run(base + " --parallel 3", dir, "DCC_LAB_THREADS=1") == 0);
    CHECK(threads() == 3);
    CHECK(run(base + " --parallel 2", dir) == 0);
    CHECK(threads() == 2);
}

TEST_CASE("lyapunov and experiment subcommands") {
    const fs::path dir = scratch("other");
    CHECK(run("lyapunov --config '" + kStable + "' --runs 4 --out '" + dir.string() + "'", dir) == 1);
    const json ly = json::parse(slurp(dir / "lyapunov.json"));
    CHECK(ly.at("estimate").at("gamma_hat").get<double>() > 0.0);

    json j = stable_json();
    j["experiment"] = {{"horizon", 2000}, {"burn_in", 0}, {"runs", 3}};
    const fs::path cfg = write_config(dir, j);
    CHECK(run("experiment-s4 --config '" + cfg.string() + "' --out '" + dir.string() + "'", dir) == 0);
    const std::string csv = slurp(dir / "experiment_s4.csv");
    CHECK(data_rows(csv) == 10);
    const json ex = json::parse(slurp(dir / "experiment_s4.json"));
    CHECK(ex.at("cells").size() == 10);
    for (const auto& cell : ex.at("cells")) CHECK(cell.at("error").is_null());
}
