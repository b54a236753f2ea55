#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dcc/chain.hpp"
#include "dcc/innovations.hpp"
#include "dcc/model.hpp"

namespace dcc {

enum class NormKind { InducedInf, Spectral };

std::string to_string(NormKind kind);

/// Lower-bound constants for Q_t. The starred pair exists only for a
/// partially scalar M family with sum of squared coefficients below one.
struct BoundConstants {
    double c_lambda = 0.0;  // lambda_min(W0)
    double c_q = 0.0;       // min_i (W0)_ii
    std::optional<double> c_lambda_star;
    std::optional<double> c_q_star;
};

/// Starred constants are filled whenever they are defined. With
/// require_starred, their absence is a StructureError.
BoundConstants compute_constants(const DccSpec& spec, bool require_starred = false);

struct NormSumsCheck {
    double vol_sum = 0.0;   // sum ||A_i|| + sum ||B_j||
    double corr_sum = 0.0;  // sum ||lift(M_k)||
    NormKind norm = NormKind::InducedInf;
    bool pass = false;
};

/// Induced-norm sums on the volatility and correlation loadings; N_l plays no role.
NormSumsCheck check_existence_norms(const DccSpec& spec, NormKind norm = NormKind::InducedInf);

struct SpectralCheck {
    double rho = 0.0;
    bool pass = false;
};

/// rho(T*) < 1 with T* the expected first-order transition.
SpectralCheck check_existence_spectral(const DccSpec& spec);

struct DiagonalMarginCheck {
    Vector margin_sums;  // per k: sum_i a_k^(i) + sum_j b_k^(j)
    Vector lift_sums;    // per vech position l: sum_k |lift(M_k)_ll|
    double vol_sup = 0.0;
    double corr_sup = 0.0;
    bool pass = false;
};

/// Componentwise version for diagonal models. StructureError otherwise.
DiagonalMarginCheck check_diagonal_margins(const DccSpec& spec);

struct ScalarCoefficientCheck {
    double vol_sum = 0.0;   // sum a + sum b
    double corr_sum = 0.0;  // sum m^2
    bool pass = false;
};

/// Scalar models only. StructureError otherwise.
ScalarCoefficientCheck check_scalar_coefficients(const DccSpec& spec);

/// Ingredients of the stationary upper bound q_t on ||Q_t||_max.
struct QBoundParams {
    double t33_norm = 0.0;                // ||T33||_s, must be < 1
    double intercept = 0.0;               // ||vech W0||_2 / (1 - ||T33||_s)
    double prefactor = 0.0;               // sqrt(m^3 (m+1) / 2)
    std::vector<double> n_lift_norms;     // ||lift(N_l)||_s
    std::size_t burn_in = 0;              // max(1000, 10 / (1 - ||T33||_s))
    bool near_unit_root = false;          // ||T33||_s > 0.999
};

/// DomainError when ||T33||_s >= 1: the bound series diverges.
QBoundParams q_bound_params(const DccSpec& spec);

/// xi_t = rho xi_{t-1} + ||eta_t||^2 started at stationary_mean; the first
/// burn_in values are dropped.
std::vector<double> xi_process(double rho, const std::vector<double>& eta_norm_sq,
                               std::size_t burn_in, double stationary_mean);

/// q_t = intercept + prefactor * sum_l ||lift(N_l)||_s xi_{t-l}.
/// Entry k corresponds to t = k + mu, so the output has xi.size() - mu + 1 values.
std::vector<double> q_bound_process(const QBoundParams& p, const std::vector<double>& xi);

/// Single q_t from lags xi_{t-1}, ..., xi_{t-mu} (most recent first).
double q_bound_value(const QBoundParams& p, const std::deque<double>& xi_lags);

/// Deterministic bound on q_t when every component satisfies |eta_k| <= eta_bound.
double q_bound_bounded(const QBoundParams& p, std::size_t m, double eta_bound);

/// Finite-horizon bound on the stacked Q history X_t^(3):
///   B_t = ||T33||_s B_{t-1} + ||pi_t||_2,  B_0 = ||X_0^(3)||_2,
///   pi_t = vech W0 + sum_l lift(N_l) vech(eps_{t-l} eps_{t-l}').
class QBoundTracker {
public:
    QBoundTracker(const DccSpec& spec, double x0_norm);

    /// eps lags eps_{t-1}, ..., eps_{t-mu}, most recent first. Returns B_t.
    double advance(const std::deque<Vector>& eps_lags);
    double bound() const { return bound_; }
    double t33_norm() const { return t33_norm_; }

private:
    Vector w0_vech_;
    std::vector<Matrix> n_lifts_;
    double t33_norm_;
    double bound_;
};

struct LogMomentCheck {
    double expectation = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    double multiplier = 0.0;  // 4 (2m+1) sqrt(m) / (sqrt(C_lambda) C_q)
    bool paired = false;
    bool pass = false;
};

/// E ln(m^2 + n^2 K ||eta_t||^2 sqrt(q_t)) for scalar order-one models, where
/// eta_t and q_t are independent. Independent mode draws them from separate
/// streams; paired mode takes q_t from the same path as eta_t (it depends on
/// eta_{t-1}, eta_{t-2}, ... only). Standard error by batch means.
LogMomentCheck check_uniqueness_scalar_log_moment(const DccSpec& spec, const InnovationSpec& innov,
                                                  std::size_t samples, double c_lambda,
                                                  double c_q, bool paired = false);

struct McSettings {
    std::size_t horizon = 10000;       // per Lyapunov replication
    std::size_t replications = 20;
    std::size_t samples = 200000;      // log-moment draws
    int threads = 1;
};

struct LyapunovCheck {
    double gamma_hat = 0.0;
    double std_error = 0.0;
    double upper_bound = 0.0;      // E ln ||N*_1||_s
    double upper_bound_se = 0.0;
    std::size_t horizon = 0;
    std::size_t replications = 0;
    std::size_t rescalings = 0;
    bool starred = false;          // built with the starred constants
    bool pass = false;
};

struct ExistenceSection {
    SpectralCheck spectral_radius;
    NormSumsCheck norm_sums;
    std::optional<DiagonalMarginCheck> diagonal_margin_sums;
    std::optional<ScalarCoefficientCheck> scalar_coefficient_sums;
    bool finite_innovation_variance = true;
    bool pass = false;
    std::string verdict;
};

struct UniquenessSection {
    bool evaluated = false;  // MC parts run only when requested and ||T33||_s < 1
    double t33_norm = 0.0;
    bool t33_contraction = false;
    double rho_t_bar = 0.0;
    bool volatility_companion = false;
    bool partially_scalar_applicable = false;
    double rho_m_star = 0.0;
    bool partially_scalar = false;
    std::optional<LyapunovCheck> lyapunov_n_star;
    std::optional<LyapunovCheck> lyapunov_n_star_starred;
    std::optional<LogMomentCheck> scalar_log_moment;
    bool lyapunov_condition = false;
    bool pass = false;
    std::string verdict;
    std::vector<std::string> conditions_held;
};

struct StationarityReport {
    ModelStructure structure;
    BoundConstants constants;
    ExistenceSection existence;
    UniquenessSection uniqueness;
    std::vector<std::string> warnings;
};

StationarityReport full_report(const DccSpec& spec, const InnovationSpec& innov,
                               const McSettings& mc, NormKind norm = NormKind::InducedInf,
                               bool run_uniqueness = true);

}  // namespace dcc
