#include "dcc/lyapunov.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <fmt/core.h>

#include "dcc/stationarity.hpp"

namespace dcc {

namespace {

constexpr double kLow = 1e-100;
constexpr double kHigh = 1e100;
constexpr std::uint64_t kLyapunovStream = 0x4c59'0000ULL;

struct ReplicationResult {
    double gamma = 0.0;
    double mean_log_norm = 0.0;
    std::size_t rescalings = 0;
};

ReplicationResult run_replication(const GeneratorFactory& factory, std::size_t horizon,
                                  std::uint64_t rep) {
    StepGenerator next = factory(rep);
    Matrix prod = next();
    double log_acc = 0.0;
    double log_norm_sum = 0.0;
    ReplicationResult out;
    // An exactly vanishing product has exponent -inf, e.g. when M = N = 0.
    const auto vanished = [&out]() {
        out.gamma = -std::numeric_limits<double>::infinity();
        out.mean_log_norm = -std::numeric_limits<double>::infinity();
        return out;
    };
    {
        const double n1 = norm_spectral(prod);
        if (n1 == 0.0) return vanished();
        log_norm_sum += std::log(n1);
    }
    for (std::size_t t = 1; t < horizon; ++t) {
        const Matrix nt = next();
        log_norm_sum += std::log(norm_spectral(nt));
        prod = prod * nt;
        const double size = prod.cwiseAbs().maxCoeff();
        if (size == 0.0) return vanished();
        if (!(size >= kLow && size <= kHigh)) {
            const double s = norm_spectral(prod);
            if (!std::isfinite(s) || s <= 0.0) {
                throw NumericError(fmt::format(
                    "lyapunov: running product degenerate at step {} of replication {}", t, rep));
            }
            prod /= s;
            log_acc += std::log(s);
            ++out.rescalings;
        }
    }
    const double final_norm = norm_spectral(prod);
    if (!std::isfinite(final_norm) || final_norm <= 0.0) {
        throw NumericError(fmt::format("lyapunov: running product degenerate in replication {}", rep));
    }
    out.gamma = (log_acc + std::log(final_norm)) / static_cast<double>(horizon);
    out.mean_log_norm = log_norm_sum / static_cast<double>(horizon);
    return out;
}

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2 || !std::isfinite(mean)) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

LyapunovEstimate combine(const std::vector<ReplicationResult>& reps, std::size_t horizon) {
    LyapunovEstimate est;
    est.horizon = horizon;
    est.replications = reps.size();
    std::vector<double> bounds;
    for (const auto& r : reps) {
        est.per_replication.push_back(r.gamma);
        bounds.push_back(r.mean_log_norm);
        est.rescalings += r.rescalings;
    }
    std::tie(est.gamma_hat, est.std_error) = mean_and_se(est.per_replication);
    std::tie(est.upper_bound, est.upper_bound_se) = mean_and_se(bounds);
    return est;
}

void check_args(std::size_t horizon, std::size_t replications) {
    if (horizon == 0) throw DomainError("lyapunov: horizon must be positive");
    if (replications == 0) throw DomainError("lyapunov: replications must be positive");
}

}  // namespace

LyapunovEstimate lyapunov_product_serial(const GeneratorFactory& factory, std::size_t horizon,
                                         std::size_t replications) {
    check_args(horizon, replications);
    std::vector<ReplicationResult> reps(replications);
    for (std::size_t r = 0; r < replications; ++r) reps[r] = run_replication(factory, horizon, r);
    return combine(reps, horizon);
}

LyapunovEstimate lyapunov_product(const GeneratorFactory& factory, std::size_t horizon,
                                  std::size_t replications, int threads) {
    check_args(horizon, replications);
    if (threads < 1) threads = 1;
    std::vector<ReplicationResult> reps(replications);
    std::vector<std::optional<std::string>> errors(replications);
    const auto n = static_cast<long long>(replications);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long r = 0; r < n; ++r) {
        const auto i = static_cast<std::size_t>(r);
        try {
            reps[i] = run_replication(factory, horizon, i);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (e) throw NumericError(*e);
    return combine(reps, horizon);
}

LyapunovEstimate estimate_lyapunov_N(const DccSpec& spec, const InnovationSpec& innov,
                                     double c_lambda, double c_q, std::size_t horizon,
                                     std::size_t replications, int threads) {
    require_valid(spec);
    innov.validate();
    if (horizon < 1000) throw DomainError("lyapunov: horizon must be at least 1000");
    const QBoundParams params = q_bound_params(spec);
    const auto sampler_n = std::make_shared<const NStarSampler>(spec, c_lambda, c_q);
    const double mean_sq = innov.mean_norm_sq(spec.m);
    const double xi0 = std::isfinite(mean_sq) ? mean_sq / (1.0 - params.t33_norm) : 0.0;
    const std::size_t mu = spec.mu();
    InnovationSpec stream = innov;
    stream.stream = innov.stream ^ kLyapunovStream;

    GeneratorFactory factory = [&spec, params, sampler_n, xi0, mu, stream](std::uint64_t rep) {
        auto sampler = std::make_shared<InnovationSampler>(stream, rep);
        auto xi = std::make_shared<std::deque<double>>(mu, xi0);
        // Forget the starting value of xi before the product starts.
        for (std::size_t t = 0; t < params.burn_in; ++t) {
            const double e2 = sampler->draw(spec.m).squaredNorm();
            xi->push_front(params.t33_norm * xi->front() + e2);
            xi->pop_back();
        }
        const std::size_t m = spec.m;
        return StepGenerator([sampler, xi, params, sampler_n, m]() {
            const double q = q_bound_value(params, *xi);
            const double e2 = sampler->draw(m).squaredNorm();
            xi->push_front(params.t33_norm * xi->front() + e2);
            xi->pop_back();
            return sampler_n->sample(e2, q);
        });
    };
    return lyapunov_product(factory, horizon, replications, threads);
}

}  // namespace dcc
