#include <algorithm>
#include <cmath>
#include <exception>

#include "dcc/simulator.hpp"

namespace dcc {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (p < 0.0 || p > 1.0) throw RangeError("quantile: p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

EnsembleResult aggregate(std::vector<TrajectorySummary> runs) {
    EnsembleResult out;
    std::vector<double> max_q, final_q, tenth_q, r12;
    std::size_t exploded = 0;
    for (const auto& run : runs) {
        if (run.error) {
            ++out.failed_runs;
            ++out.unstable_runs;
            continue;
        }
        if (run.exploded()) ++exploded;
        if (!run.moment_stable()) ++out.unstable_runs;
        max_q.push_back(run.max_q_norm);
        // An exploded run has crossed the threshold; its terminal norm is the crossing value.
        final_q.push_back(run.q_norm_final);
        tenth_q.push_back(run.q_norm_tenth);
        if (!run.exploded() && run.terminal_r_offdiag.size() > 0) r12.push_back(run.terminal_r_offdiag(0));
    }
    const std::size_t valid = runs.size() - out.failed_runs;
    out.explosion_fraction = valid > 0 ? static_cast<double>(exploded) / static_cast<double>(valid) : 0.0;
    for (double p : {0.0, 0.25, 0.5, 0.75, 0.9, 1.0}) out.max_q_quantiles.push_back(quantile(max_q, p));
    out.median_q_final = quantile(final_q, 0.5);
    out.median_q_tenth = quantile(tenth_q, 0.5);
    if (r12.size() > 1) {
        double mean = 0.0;
        for (double v : r12) mean += v;
        mean /= static_cast<double>(r12.size());
        double ss = 0.0;
        for (double v : r12) ss += (v - mean) * (v - mean);
        out.terminal_r12_std = std::sqrt(ss / static_cast<double>(r12.size() - 1));
    }
    out.runs = std::move(runs);
    return out;
}

namespace {

TrajectorySummary guarded_run(const DccSpec& spec, const SimConfig& cfg,
                              const InnovationSpec& innov, std::size_t i) {
    try {
        return simulate_summary(spec, cfg, innov, i);
    } catch (const std::exception& e) {
        TrajectorySummary s;
        s.horizon = cfg.horizon;
        s.error = e.what();
        return s;
    }
}

}  // namespace

EnsembleResult ensemble_serial(const DccSpec& spec, const SimConfig& cfg,
                               const InnovationSpec& innov, std::size_t n_runs) {
    require_valid(spec);
    cfg.validate(spec.m);
    innov.validate();
    std::vector<TrajectorySummary> runs(n_runs);
    for (std::size_t i = 0; i < n_runs; ++i) runs[i] = guarded_run(spec, cfg, innov, i);
    return aggregate(std::move(runs));
}

EnsembleResult ensemble(const DccSpec& spec, const SimConfig& cfg, const InnovationSpec& innov,
                        std::size_t n_runs, int threads) {
    require_valid(spec);
    cfg.validate(spec.m);
    innov.validate();
    if (threads < 1) threads = 1;
    std::vector<TrajectorySummary> runs(n_runs);
    const auto n = static_cast<long long>(n_runs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < n; ++i) {
        runs[static_cast<std::size_t>(i)] = guarded_run(spec, cfg, innov, static_cast<std::size_t>(i));
    }
    return aggregate(std::move(runs));
}

}  // namespace dcc
