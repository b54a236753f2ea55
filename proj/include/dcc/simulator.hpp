#pragma once

#include <array>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dcc/chain.hpp"
#include "dcc/innovations.hpp"
#include "dcc/model.hpp"

namespace dcc {

struct SimConfig {
    std::size_t horizon = 10000;
    std::size_t burn_in = 0;
    Matrix Q0;                         // SPD; R0 is its correlation matrix
    Vector h0;                         // initial conditional variances
    double explode_threshold = 1e12;   // on ||Q_t||_max
    std::size_t stride = 1;

    void validate(std::size_t m) const;
    /// Q0 = I_m, h0 = 1/2, as in the reference experiment.
    static SimConfig reference(std::size_t m, std::size_t horizon);
};

/// Lag buffers, most recent first: vol has r entries, sq_returns s, q nu, eps mu.
struct SimState {
    std::size_t t = 0;
    std::deque<Vector> vol;
    std::deque<Vector> sq_returns;
    std::deque<Matrix> q;
    std::deque<Vector> eps;

    /// X_t of the Markov-chain representation.
    StateVector to_state_vector(const StateLayout& layout) const;
};

struct StepRecord {
    std::size_t t = 0;
    Vector z, eps, eta, h;
    Vector vech_q, vech_r;
    double q_norm_max = 0.0;
    double lambda_min_q = 0.0;
    double lambda_min_r = 0.0;
    bool overflow = false;  // non-finite h, Q or z; the state is no longer usable
};

/// Pre-history: every lag of D and Q set to (h0, Q0); eps lags drawn as
/// R0^{1/2} eta from the sampler, squared-return lags D0^{1/2} eps.
SimState initial_state(const DccSpec& spec, const SimConfig& cfg, InnovationSampler& sampler);

/// One period of the recursion. D_t and Q_t come from the lags, then R_t,
/// then eps_t = R_t^{1/2} eta_t and z_t = D_t^{1/2} eps_t. Buffers are rotated.
StepRecord step(const DccSpec& spec, SimState& state, const Vector& eta);

/// Running checks of the trajectory-level invariants.
struct InvariantStats {
    double min_lambda_q = std::numeric_limits<double>::infinity();
    double min_lambda_r = std::numeric_limits<double>::infinity();
    double max_abs_r_offdiag = 0.0;
    double max_r_diag_error = 0.0;
    double min_h_margin = std::numeric_limits<double>::infinity();  // min_{k,t} h_kt - V0_k

    void update(const DccSpec& spec, const StepRecord& rec);
};

struct TrajectorySummary {
    std::size_t horizon = 0;
    std::size_t steps_completed = 0;
    std::optional<std::size_t> first_explosion_time;
    double max_q_norm = 0.0;
    double q_norm_tenth = 0.0;   // ||Q_t||_max at t = horizon/10
    double q_norm_final = 0.0;   // at the last completed step
    Vector terminal_r_offdiag;   // strictly lower triangle of R, vech order
    // Post-burn-in moments of z, summed over components: E|z|^p for p = 1..4.
    std::array<double, 4> z_moments{};
    // Mean of ||z_t||^2 over the second half of the window divided by the first half.
    double second_moment_ratio = 0.0;
    InvariantStats invariants;
    std::optional<std::string> error;

    bool exploded() const { return first_explosion_time.has_value(); }
    /// Finite run whose second moment is stable across window halves.
    bool moment_stable() const;
};

struct Trajectory {
    std::vector<StepRecord> records;  // post burn-in, every stride-th step
    TrajectorySummary summary;
};

Trajectory simulate(const DccSpec& spec, const SimConfig& cfg, const InnovationSpec& innov,
                    std::uint64_t run = 0);
/// Same run without keeping the per-step records.
TrajectorySummary simulate_summary(const DccSpec& spec, const SimConfig& cfg,
                                   const InnovationSpec& innov, std::uint64_t run = 0);

struct MomentEstimate {
    std::string series;  // "z", "eps", "h", "Q"
    std::size_t component = 0;
    double order = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double first_half = 0.0;
    double second_half = 0.0;
    double half_ratio() const { return second_half / first_half; }
};

/// E|x|^p for each component of z, eps, h and vech(Q) over the recorded window.
std::vector<MomentEstimate> moment_diagnostics(const Trajectory& traj,
                                               const std::vector<double>& orders);

struct EnsembleResult {
    std::vector<TrajectorySummary> runs;
    double explosion_fraction = 0.0;
    std::size_t failed_runs = 0;
    // Quantiles (0, 0.25, 0.5, 0.75, 0.9, 1) of the per-run max ||Q_t||_max.
    std::vector<double> max_q_quantiles;
    double median_q_final = 0.0;
    double median_q_tenth = 0.0;
    double terminal_r12_std = 0.0;  // first off-diagonal of R_T across runs
    std::size_t unstable_runs = 0;  // !moment_stable()
};

/// Runs i = 0..n_runs-1 on independent streams derived from (seed, stream, i).
/// Results do not depend on the thread count.
EnsembleResult ensemble(const DccSpec& spec, const SimConfig& cfg, const InnovationSpec& innov,
                        std::size_t n_runs, int threads);
/// Serial reference of ensemble().
EnsembleResult ensemble_serial(const DccSpec& spec, const SimConfig& cfg,
                               const InnovationSpec& innov, std::size_t n_runs);

EnsembleResult aggregate(std::vector<TrajectorySummary> runs);

double quantile(std::vector<double> values, double p);

}  // namespace dcc
