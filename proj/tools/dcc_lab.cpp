// dcc_lab: stationarity checks, simulation and the reference experiment grid.
//
// Exit codes: 0 success, 1 a requested check failed, 2 configuration error,
// 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "dcc/config.hpp"
#include "dcc/lyapunov.hpp"
#include "dcc/report.hpp"
#include "dcc/simulator.hpp"
#include "dcc/stationarity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<int> parallel;
};

int resolve_threads(const Options& opt) {
    if (opt.parallel) return std::max(*opt.parallel, 1);
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("DCC_LAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring DCC_LAB_THREADS=" << env << "\n";
        }
    }
    return n;
}

dcc::RunConfig load(const Options& opt) {
    dcc::RunConfig cfg = dcc::load_config(opt.config);
    if (opt.out) cfg.output.dir = *opt.out;
    if (opt.seed) cfg.innovations.seed = *opt.seed;
    return cfg;
}

void emit(const dcc::RunConfig& cfg, const std::string& format, const std::string& name,
          const std::string& content) {
    if (!cfg.output.wants(format)) return;
    const fs::path path = fs::path(cfg.output.dir) / name;
    dcc::write_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_check(const Options& opt) {
    dcc::RunConfig cfg = load(opt);
    cfg.mc.threads = resolve_threads(opt);
    if (opt.runs) cfg.mc.replications = *opt.runs;
    const auto rep = dcc::full_report(cfg.model, cfg.innovations, cfg.mc, cfg.checks.norm,
                                      cfg.checks.uniqueness || cfg.checks.require_uniqueness);
    json j = dcc::to_json(rep);
    j["config"] = json::parse(dcc::serialize_config(cfg));
    j["threads"] = cfg.mc.threads;
    emit(cfg, "json", "report.json", j.dump(2) + "\n");
    const std::string text = dcc::to_text(rep);
    emit(cfg, "text", "report.txt", text);
    std::cout << text;
    const bool ok = rep.existence.pass && (!cfg.checks.require_uniqueness || rep.uniqueness.pass);
    return ok ? kOk : kCheckFailed;
}

int cmd_simulate(const Options& opt) {
    dcc::RunConfig cfg = load(opt);
    const std::size_t runs = opt.runs.value_or(1);
    if (runs == 0) throw dcc::ConfigError("--runs", 0, "must be positive");
    const dcc::Trajectory traj = dcc::simulate(cfg.model, cfg.sim, cfg.innovations, 0);
    emit(cfg, "csv", "trajectory.csv", dcc::trajectory_csv(traj, cfg.model.m));

    json j;
    j["innovations"] = cfg.innovations.describe();
    j["seed"] = cfg.innovations.seed;
    j["threads"] = resolve_threads(opt);
    j["summary"] = dcc::to_json(traj.summary);
    if (!traj.summary.exploded() && traj.records.size() >= 2) {
        j["moments"] = dcc::to_json(dcc::moment_diagnostics(traj, {1.0, 2.0, 4.0}));
    } else {
        j["moments"] = nullptr;
    }
    std::string text = dcc::to_text(traj.summary);
    if (runs > 1) {
        const auto ens = dcc::ensemble(cfg.model, cfg.sim, cfg.innovations, runs, resolve_threads(opt));
        j["ensemble"] = dcc::to_json(ens);
        text += fmt::format("ensemble of {} runs: explosion fraction {}, unstable runs {}\n", runs,
                            dcc::format_double(ens.explosion_fraction), ens.unstable_runs);
    }
    emit(cfg, "json", "summary.json", j.dump(2) + "\n");
    emit(cfg, "text", "summary.txt", text);
    std::cout << text;
    return kOk;
}

int cmd_lyapunov(const Options& opt) {
    dcc::RunConfig cfg = load(opt);
    if (opt.runs) cfg.mc.replications = *opt.runs;
    const int threads = resolve_threads(opt);
    const auto consts = dcc::compute_constants(cfg.model);
    const auto est = dcc::estimate_lyapunov_N(cfg.model, cfg.innovations, consts.c_lambda, consts.c_q,
                                              cfg.mc.horizon, cfg.mc.replications, threads);
    json j;
    j["constants"] = dcc::to_json(consts);
    j["estimate"] = dcc::to_json(est);
    std::string text = dcc::to_text(est);
    bool pass = est.gamma_hat + 2.0 * est.std_error < 0.0;
    if (consts.c_lambda_star) {
        const auto starred = dcc::estimate_lyapunov_N(cfg.model, cfg.innovations, *consts.c_lambda_star,
                                                      *consts.c_q_star, cfg.mc.horizon,
                                                      cfg.mc.replications, threads);
        j["estimate_starred_constants"] = dcc::to_json(starred);
        text += "\nwith starred constants\n" + dcc::to_text(starred);
        pass = pass || starred.gamma_hat + 2.0 * starred.std_error < 0.0;
    } else {
        j["estimate_starred_constants"] = nullptr;
    }
    emit(cfg, "json", "lyapunov.json", j.dump(2) + "\n");
    emit(cfg, "text", "lyapunov.txt", text);
    std::cout << text;
    return pass ? kOk : kCheckFailed;
}

int cmd_experiment(const Options& opt) {
    dcc::RunConfig cfg = load(opt);
    const auto& ex = cfg.experiment;
    const std::size_t runs = opt.runs.value_or(ex.runs);
    if (runs == 0) throw dcc::ConfigError("--runs", 0, "must be positive");
    const int threads = resolve_threads(opt);
    dcc::SimConfig sim = dcc::SimConfig::reference(2, ex.horizon);
    sim.burn_in = ex.burn_in;

    json rows = json::array();
    std::string csv =
        "m_squared,innovations,runs,failed_runs,explosion_fraction,max_q_min,max_q_q25,max_q_median,"
        "max_q_q75,max_q_q90,max_q_max,growth_ratio,terminal_r12_std,unstable_runs,error\n";
    std::string text;
    std::uint64_t cell = 0;
    for (double m_sq : ex.m_squared) {
        for (const auto& law : ex.innovations) {
            dcc::InnovationSpec innov = law;
            innov.seed = cfg.innovations.seed;
            innov.stream = cell++;
            json row;
            row["m_squared"] = m_sq;
            row["n_squared"] = ex.n_squared;
            row["innovations"] = innov.describe();
            std::string error;
            try {
                const auto spec = dcc::reference_bivariate_spec(m_sq, ex.n_squared);
                const auto res = dcc::ensemble(spec, sim, innov, runs, threads);
                row["result"] = dcc::to_json(res);
                const auto& q = res.max_q_quantiles;
                csv += fmt::format("{},\"{}\",{},{},{},{},{},{},{},{},{},{},{},{},\n", dcc::format_double(m_sq),
                                   innov.describe(), runs, res.failed_runs,
                                   dcc::format_double(res.explosion_fraction), dcc::format_double(q[0]),
                                   dcc::format_double(q[1]), dcc::format_double(q[2]), dcc::format_double(q[3]),
                                   dcc::format_double(q[4]), dcc::format_double(q[5]),
                                   dcc::format_double(res.median_q_final / res.median_q_tenth),
                                   dcc::format_double(res.terminal_r12_std), res.unstable_runs);
                text += fmt::format("m^2={:<6} {:<36} explode={:<5} median max||Q||={:<12.6g} growth={:<12.6g} "
                                    "sd(R12_T)={:<8.4g} unstable={}/{}\n",
                                    dcc::format_double(m_sq), innov.describe(),
                                    dcc::format_double(res.explosion_fraction), q[2],
                                    res.median_q_final / res.median_q_tenth, res.terminal_r12_std,
                                    res.unstable_runs, runs);
            } catch (const std::exception& e) {
                error = e.what();
                row["result"] = nullptr;
                csv += fmt::format("{},\"{}\",{},,,,,,,,,,,,\"{}\"\n", dcc::format_double(m_sq), innov.describe(),
                                   runs, error);
                text += fmt::format("m^2={} {}: failed: {}\n", dcc::format_double(m_sq), innov.describe(), error);
            }
            row["error"] = error.empty() ? json(nullptr) : json(error);
            rows.push_back(row);
        }
    }
    json j;
    j["horizon"] = ex.horizon;
    j["burn_in"] = ex.burn_in;
    j["runs_per_cell"] = runs;
    j["seed"] = cfg.innovations.seed;
    j["cells"] = rows;
    emit(cfg, "json", "experiment_s4.json", j.dump(2) + "\n");
    emit(cfg, "text", "experiment_s4.txt", text);
    emit(cfg, "csv", "experiment_s4.csv", csv);
    std::cout << text;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DCC-GARCH stationarity lab"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON run configuration")->required();
        sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
        sub->add_option("--seed", opt.seed, "master seed (overrides innovations.seed)");
        sub->add_option("--runs", opt.runs, "runs or replications");
        sub->add_option("--parallel", opt.parallel, "worker threads (wins over DCC_LAB_THREADS)");
    };
    auto* check = app.add_subcommand("check", "evaluate existence and uniqueness conditions");
    auto* simulate = app.add_subcommand("simulate", "simulate one trajectory (ensemble with --runs > 1)");
    auto* lyapunov = app.add_subcommand("lyapunov", "estimate the top Lyapunov exponent of N*");
    auto* experiment = app.add_subcommand("experiment-s4", "run the reference bivariate experiment grid");
    for (auto* sub : {check, simulate, lyapunov, experiment}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (check->parsed()) return cmd_check(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (lyapunov->parsed()) return cmd_lyapunov(opt);
        if (experiment->parsed()) return cmd_experiment(opt);
    } catch (const dcc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const dcc::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kConfigError;
}
