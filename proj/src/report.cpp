#include "dcc/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <fmt/core.h>
#include <unistd.h>

namespace dcc {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

json vec_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

// NaN and inf are not JSON numbers; keep them readable as strings.
json num(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

json opt_num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

}  // namespace

json to_json(const BoundConstants& c) {
    return {{"c_lambda", num(c.c_lambda)},
            {"c_q", num(c.c_q)},
            {"c_lambda_star", opt_num(c.c_lambda_star)},
            {"c_q_star", opt_num(c.c_q_star)}};
}

namespace {

json lyapunov_check_json(const LyapunovCheck& l) {
    return {{"gamma_hat", num(l.gamma_hat)},
            {"std_error", num(l.std_error)},
            {"upper_bound", num(l.upper_bound)},
            {"upper_bound_std_error", num(l.upper_bound_se)},
            {"horizon", l.horizon},
            {"replications", l.replications},
            {"rescalings", l.rescalings},
            {"starred_constants", l.starred},
            {"pass", l.pass}};
}

}  // namespace

json to_json(const StationarityReport& rep) {
    json j;
    j["structure"] = to_string(rep.structure.kind);
    j["constants"] = to_json(rep.constants);

    const auto& ex = rep.existence;
    json e;
    e["spectral_radius"] = {{"rho_T_star", num(ex.spectral_radius.rho)}, {"pass", ex.spectral_radius.pass}};
    e["norm_sums"] = {{"volatility_sum", num(ex.norm_sums.vol_sum)},
                      {"correlation_sum", num(ex.norm_sums.corr_sum)},
                      {"norm_used", to_string(ex.norm_sums.norm)},
                      {"pass", ex.norm_sums.pass}};
    if (ex.diagonal_margin_sums) {
        const auto& d = *ex.diagonal_margin_sums;
        e["diagonal_margin_sums"] = {{"margin_sums", vec_json(d.margin_sums)},
                                     {"lift_sums", vec_json(d.lift_sums)},
                                     {"volatility_sup", num(d.vol_sup)},
                                     {"correlation_sup", num(d.corr_sup)},
                                     {"pass", d.pass}};
    } else {
        e["diagonal_margin_sums"] = nullptr;
    }
    if (ex.scalar_coefficient_sums) {
        const auto& s = *ex.scalar_coefficient_sums;
        e["scalar_coefficient_sums"] = {{"volatility_sum", num(s.vol_sum)},
                                        {"correlation_sum", num(s.corr_sum)},
                                        {"pass", s.pass}};
    } else {
        e["scalar_coefficient_sums"] = nullptr;
    }
    e["finite_innovation_variance"] = ex.finite_innovation_variance;
    e["pass"] = ex.pass;
    e["verdict"] = ex.verdict;
    j["existence"] = e;

    const auto& un = rep.uniqueness;
    json u;
    u["t33_contraction"] = {{"T33_norm", num(un.t33_norm)}, {"pass", un.t33_contraction}};
    u["volatility_companion"] = {{"rho_T_bar", num(un.rho_t_bar)}, {"pass", un.volatility_companion}};
    u["partially_scalar"] = {{"applicable", un.partially_scalar_applicable},
                             {"rho_M_star", un.partially_scalar_applicable ? num(un.rho_m_star) : json(nullptr)},
                             {"pass", un.partially_scalar}};
    u["lyapunov_n_star"] = un.lyapunov_n_star ? lyapunov_check_json(*un.lyapunov_n_star) : json(nullptr);
    u["lyapunov_n_star_starred"] =
        un.lyapunov_n_star_starred ? lyapunov_check_json(*un.lyapunov_n_star_starred) : json(nullptr);
    if (un.scalar_log_moment) {
        const auto& s = *un.scalar_log_moment;
        u["scalar_log_moment"] = {{"expectation", num(s.expectation)},
                                  {"std_error", num(s.std_error)},
                                  {"samples", s.samples},
                                  {"multiplier", num(s.multiplier)},
                                  {"paired", s.paired},
                                  {"pass", s.pass}};
    } else {
        u["scalar_log_moment"] = nullptr;
    }
    u["evaluated"] = un.evaluated;
    u["lyapunov_condition"] = un.lyapunov_condition;
    u["conditions_held"] = un.conditions_held;
    u["pass"] = un.pass;
    u["verdict"] = un.verdict;
    j["uniqueness"] = u;
    j["warnings"] = rep.warnings;
    return j;
}

json to_json(const TrajectorySummary& s) {
    json j;
    j["horizon"] = s.horizon;
    j["steps_completed"] = s.steps_completed;
    j["first_explosion_time"] = s.first_explosion_time ? json(*s.first_explosion_time) : json(nullptr);
    j["max_q_norm"] = num(s.max_q_norm);
    j["q_norm_tenth"] = num(s.q_norm_tenth);
    j["q_norm_final"] = num(s.q_norm_final);
    j["terminal_r_offdiag"] = vec_json(s.terminal_r_offdiag);
    json mom = json::array();
    for (double x : s.z_moments) mom.push_back(num(x));
    j["z_abs_moments_1_to_4"] = mom;
    j["second_moment_ratio"] = num(s.second_moment_ratio);
    j["moment_stable"] = s.moment_stable();
    j["invariants"] = {{"min_lambda_q", num(s.invariants.min_lambda_q)},
                       {"min_lambda_r", num(s.invariants.min_lambda_r)},
                       {"max_abs_r_offdiag", num(s.invariants.max_abs_r_offdiag)},
                       {"max_r_diag_error", num(s.invariants.max_r_diag_error)},
                       {"min_h_margin", num(s.invariants.min_h_margin)}};
    j["error"] = s.error ? json(*s.error) : json(nullptr);
    return j;
}

json to_json(const EnsembleResult& e) {
    json j;
    j["runs"] = e.runs.size();
    j["explosion_fraction"] = num(e.explosion_fraction);
    j["failed_runs"] = e.failed_runs;
    json q = json::object();
    const char* names[] = {"min", "q25", "median", "q75", "q90", "max"};
    for (std::size_t i = 0; i < e.max_q_quantiles.size() && i < 6; ++i) q[names[i]] = num(e.max_q_quantiles[i]);
    j["max_q_norm_quantiles"] = q;
    j["median_q_norm_final"] = num(e.median_q_final);
    j["median_q_norm_tenth"] = num(e.median_q_tenth);
    j["growth_ratio"] = num(e.median_q_final / e.median_q_tenth);
    j["terminal_r12_std"] = num(e.terminal_r12_std);
    j["unstable_runs"] = e.unstable_runs;
    json runs = json::array();
    for (const auto& r : e.runs) runs.push_back(to_json(r));
    j["per_run"] = runs;
    return j;
}

json to_json(const LyapunovEstimate& e) {
    return {{"gamma_hat", num(e.gamma_hat)},
            {"std_error", num(e.std_error)},
            {"upper_bound", num(e.upper_bound)},
            {"upper_bound_std_error", num(e.upper_bound_se)},
            {"horizon", e.horizon},
            {"replications", e.replications},
            {"rescalings", e.rescalings},
            {"pass", e.gamma_hat + 2.0 * e.std_error < 0.0}};
}

json to_json(const std::vector<MomentEstimate>& moments) {
    json out = json::array();
    for (const auto& m : moments) {
        out.push_back({{"series", m.series},
                       {"component", m.component + 1},
                       {"order", num(m.order)},
                       {"mean", num(m.mean)},
                       {"std_error", num(m.std_error)},
                       {"first_half", num(m.first_half)},
                       {"second_half", num(m.second_half)},
                       {"half_ratio", num(m.half_ratio())}});
    }
    return out;
}

namespace {

const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::string to_text(const StationarityReport& rep) {
    std::string s;
    auto line = [&s](const std::string& l) { s += l + "\n"; };
    const auto& ex = rep.existence;
    const auto& un = rep.uniqueness;
    line(fmt::format("structure: {}", to_string(rep.structure.kind)));
    line(fmt::format("constants: C_lambda={} C_q={}{}", format_double(rep.constants.c_lambda),
                     format_double(rep.constants.c_q),
                     rep.constants.c_lambda_star
                         ? fmt::format(" C*_lambda={} C*_q={}", format_double(*rep.constants.c_lambda_star),
                                       format_double(*rep.constants.c_q_star))
                         : std::string()));
    line("");
    line("existence");
    line(fmt::format("  spectral radius rho(T*) = {}  pass={}", format_double(ex.spectral_radius.rho),
                     yes_no(ex.spectral_radius.pass)));
    line(fmt::format("  norm sums ({}): volatility={} correlation={}  pass={}", to_string(ex.norm_sums.norm),
                     format_double(ex.norm_sums.vol_sum), format_double(ex.norm_sums.corr_sum),
                     yes_no(ex.norm_sums.pass)));
    if (ex.diagonal_margin_sums) {
        line(fmt::format("  diagonal margins: sup volatility={} sup correlation={}  pass={}",
                         format_double(ex.diagonal_margin_sums->vol_sup),
                         format_double(ex.diagonal_margin_sums->corr_sup), yes_no(ex.diagonal_margin_sums->pass)));
    }
    if (ex.scalar_coefficient_sums) {
        line(fmt::format("  scalar coefficients: sum a+b={} sum m^2={}  pass={}",
                         format_double(ex.scalar_coefficient_sums->vol_sum),
                         format_double(ex.scalar_coefficient_sums->corr_sum),
                         yes_no(ex.scalar_coefficient_sums->pass)));
    }
    line(fmt::format("  finite innovation variance: {}", yes_no(ex.finite_innovation_variance)));
    line(fmt::format("  verdict: {}", ex.verdict));
    line("");
    line("uniqueness");
    line(fmt::format("  ||T33||_s = {}  pass={}", format_double(un.t33_norm), yes_no(un.t33_contraction)));
    line(fmt::format("  rho(T_bar*) = {}  pass={}", format_double(un.rho_t_bar), yes_no(un.volatility_companion)));
    if (un.partially_scalar_applicable) {
        line(fmt::format("  partially scalar M: rho(M*) = {}  pass={}", format_double(un.rho_m_star),
                         yes_no(un.partially_scalar)));
    } else {
        line("  partially scalar M: not applicable");
    }
    auto lyap = [&line](const char* name, const LyapunovCheck& l) {
        line(fmt::format("  {}: gamma_hat={} se={} (T={}, {} replications), E ln||N*_1||={}  pass={}", name,
                         format_double(l.gamma_hat), format_double(l.std_error), l.horizon, l.replications,
                         format_double(l.upper_bound), yes_no(l.pass)));
    };
    if (un.lyapunov_n_star) lyap("Lyapunov exponent of N*", *un.lyapunov_n_star);
    if (un.lyapunov_n_star_starred) lyap("Lyapunov exponent of N* (starred constants)", *un.lyapunov_n_star_starred);
    if (un.scalar_log_moment) {
        const auto& lm = *un.scalar_log_moment;
        line(fmt::format("  scalar log-moment: E ln(...)={} se={} (n={}, multiplier {})  pass={}",
                         format_double(lm.expectation), format_double(lm.std_error), lm.samples,
                         format_double(lm.multiplier), yes_no(lm.pass)));
    }
    std::string held;
    for (const auto& c : un.conditions_held) held += (held.empty() ? "" : ", ") + c;
    line(fmt::format("  conditions held: {}", held.empty() ? "none" : held));
    line(fmt::format("  verdict: {}", un.verdict));
    for (const auto& w : rep.warnings) line("warning: " + w);
    return s;
}

std::string to_text(const TrajectorySummary& s) {
    std::string out;
    out += fmt::format("steps completed: {} of {}\n", s.steps_completed, s.horizon);
    out += s.first_explosion_time ? fmt::format("explosion at t={}\n", *s.first_explosion_time)
                                  : std::string("no explosion\n");
    out += fmt::format("max ||Q_t||_max: {}\n", format_double(s.max_q_norm));
    out += fmt::format("second-moment half ratio: {}  stable={}\n", format_double(s.second_moment_ratio),
                       yes_no(s.moment_stable()));
    out += fmt::format("min lambda(Q_t): {}  min lambda(R_t): {}\n", format_double(s.invariants.min_lambda_q),
                       format_double(s.invariants.min_lambda_r));
    if (s.error) out += "error: " + *s.error + "\n";
    return out;
}

std::string to_text(const LyapunovEstimate& e) {
    return fmt::format("gamma_hat: {}\nstd_error: {}\nupper bound E ln||N*_1||: {} (se {})\n"
                       "horizon: {}\nreplications: {}\nrescalings: {}\nnegative at 2 se: {}\n",
                       format_double(e.gamma_hat), format_double(e.std_error), format_double(e.upper_bound),
                       format_double(e.upper_bound_se), e.horizon, e.replications, e.rescalings,
                       yes_no(e.gamma_hat + 2.0 * e.std_error < 0.0));
}

std::string trajectory_csv(const Trajectory& traj, std::size_t m) {
    const SymIndexMap idx(m);
    std::string out = "t";
    for (std::size_t k = 1; k <= m; ++k) out += fmt::format(",z_{}", k);
    for (std::size_t k = 1; k <= m; ++k) out += fmt::format(",h_{}", k);
    for (std::size_t k = 0; k < idx.half(); ++k) {
        const auto [i, j] = idx.pair(k);
        out += fmt::format(",Q_{}_{}", i + 1, j + 1);
    }
    for (std::size_t k = 0; k < idx.half(); ++k) {
        const auto [i, j] = idx.pair(k);
        out += fmt::format(",R_{}_{}", i + 1, j + 1);
    }
    out += '\n';
    for (const auto& rec : traj.records) {
        out += std::to_string(rec.t);
        for (const Vector* v : {&rec.z, &rec.h, &rec.vech_q, &rec.vech_r}) {
            for (Eigen::Index k = 0; k < v->size(); ++k) {
                out += ',';
                out += format_double((*v)(k));
            }
        }
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
    const fs::path tmp = dir / fmt::format(".{}.tmp.{}", path.filename().string(), ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot open {} for writing", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError(fmt::format("write to {} failed", tmp.string()));
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError(fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
    }
}

}  // namespace dcc
