#include "dcc/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "dcc/lyapunov.hpp"

namespace dcc {

std::string to_string(NormKind kind) {
    return kind == NormKind::InducedInf ? "induced_inf" : "spectral";
}

namespace {

constexpr std::uint64_t kLogMomentEtaStream = 0x4c4d'0001ULL;
constexpr std::uint64_t kLogMomentXiStream = 0x4c4d'0002ULL;
constexpr std::size_t kBatches = 100;

double induced(const Matrix& a, NormKind kind) {
    return kind == NormKind::InducedInf ? norm_induced_inf(a) : norm_spectral(a);
}

// 1 - sum_k (m^(k))^2, accumulated with fma so the gap keeps the low bits of each square.
double m_coef_gap(const DccSpec& spec, bool* scalar) {
    double gap = 1.0;
    *scalar = true;
    for (const auto& mk : spec.M) {
        double c = 0.0;
        if (!is_scalar_identity(mk, &c)) {
            *scalar = false;
            return 0.0;
        }
        gap = std::fma(-c, c, gap);
    }
    return gap;
}

}  // namespace

BoundConstants compute_constants(const DccSpec& spec, bool require_starred) {
    const SpdMatrix w0(spec.W0);
    BoundConstants c;
    c.c_lambda = lambda_min_spd(w0);
    c.c_q = spec.W0.diagonal().minCoeff();
    bool scalar = false;
    const double gap = m_coef_gap(spec, &scalar);
    if (scalar && gap > 0.0) {
        c.c_lambda_star = c.c_lambda / gap;
        c.c_q_star = c.c_q / gap;
    } else if (require_starred) {
        throw StructureError(scalar ? "starred constants need sum of squared M coefficients < 1"
                                    : "starred constants need a partially scalar M family");
    }
    return c;
}

NormSumsCheck check_existence_norms(const DccSpec& spec, NormKind norm) {
    NormSumsCheck out;
    out.norm = norm;
    for (const auto& a : spec.A) out.vol_sum += induced(a, norm);
    for (const auto& b : spec.B) out.vol_sum += induced(b, norm);
    const SymIndexMap idx(spec.m);
    for (const auto& mk : spec.M) out.corr_sum += induced(lift_congruence(mk, idx), norm);
    out.pass = out.vol_sum < 1.0 && out.corr_sum < 1.0;
    return out;
}

SpectralCheck check_existence_spectral(const DccSpec& spec) {
    SpectralCheck out;
    out.rho = spectral_radius(build_T_star(spec));
    out.pass = out.rho < 1.0;
    return out;
}

DiagonalMarginCheck check_diagonal_margins(const DccSpec& spec) {
    const auto kind = detect_structure(spec).kind;
    if (kind != StructureKind::Diagonal && kind != StructureKind::Scalar) {
        throw StructureError("diagonal margin check needs a diagonal model");
    }
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto h = static_cast<Eigen::Index>(half_dim(spec.m));
    DiagonalMarginCheck out;
    out.margin_sums = Vector::Zero(m);
    for (const auto& a : spec.A) out.margin_sums += a.diagonal();
    for (const auto& b : spec.B) out.margin_sums += b.diagonal();
    out.lift_sums = Vector::Zero(h);
    const SymIndexMap idx(spec.m);
    for (const auto& mk : spec.M) out.lift_sums += lift_congruence(mk, idx).diagonal().cwiseAbs();
    out.vol_sup = out.margin_sums.maxCoeff();
    out.corr_sup = out.lift_sums.maxCoeff();
    out.pass = out.vol_sup < 1.0 && out.corr_sup < 1.0;
    return out;
}

ScalarCoefficientCheck check_scalar_coefficients(const DccSpec& spec) {
    const ModelStructure st = detect_structure(spec);
    if (st.kind != StructureKind::Scalar) {
        throw StructureError("scalar coefficient check needs a scalar model");
    }
    ScalarCoefficientCheck out;
    for (double a : st.a) out.vol_sum += a;
    for (double b : st.b) out.vol_sum += b;
    for (double c : st.m_coefs) out.corr_sum += c * c;
    out.pass = out.vol_sum < 1.0 && out.corr_sum < 1.0;
    return out;
}

QBoundParams q_bound_params(const DccSpec& spec) {
    QBoundParams p;
    p.t33_norm = norm_spectral(build_T33(spec));
    if (!(p.t33_norm < 1.0)) {
        throw DomainError(fmt::format("bound process needs ||T33||_s < 1 (got {})", p.t33_norm));
    }
    const double gap = 1.0 - p.t33_norm;
    p.intercept = vech(spec.W0).norm() / gap;
    const double m = static_cast<double>(spec.m);
    p.prefactor = std::sqrt(m * m * m * (m + 1.0) / 2.0);
    const SymIndexMap idx(spec.m);
    for (const auto& nl : spec.N) p.n_lift_norms.push_back(norm_spectral(lift_congruence(nl, idx)));
    p.burn_in = static_cast<std::size_t>(std::max(1000.0, std::ceil(10.0 / gap)));
    p.near_unit_root = p.t33_norm > 0.999;
    return p;
}

std::vector<double> xi_process(double rho, const std::vector<double>& eta_norm_sq,
                               std::size_t burn_in, double stationary_mean) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("xi_process: need 0 <= rho < 1");
    if (burn_in > eta_norm_sq.size()) throw DomainError("xi_process: burn_in exceeds series length");
    std::vector<double> out;
    out.reserve(eta_norm_sq.size() - burn_in);
    double xi = stationary_mean;
    for (std::size_t t = 0; t < eta_norm_sq.size(); ++t) {
        xi = rho * xi + eta_norm_sq[t];
        if (t >= burn_in) out.push_back(xi);
    }
    return out;
}

double q_bound_value(const QBoundParams& p, const std::deque<double>& xi_lags) {
    if (xi_lags.size() < p.n_lift_norms.size()) throw DomainError("q_bound_value: too few xi lags");
    double s = 0.0;
    for (std::size_t l = 0; l < p.n_lift_norms.size(); ++l) s += p.n_lift_norms[l] * xi_lags[l];
    return p.intercept + p.prefactor * s;
}

std::vector<double> q_bound_process(const QBoundParams& p, const std::vector<double>& xi) {
    const std::size_t mu = p.n_lift_norms.size();
    if (xi.size() < mu) throw DomainError("q_bound_process: series shorter than mu");
    std::vector<double> out;
    out.reserve(xi.size() - mu + 1);
    for (std::size_t t = mu; t <= xi.size(); ++t) {
        double s = 0.0;
        for (std::size_t l = 1; l <= mu; ++l) s += p.n_lift_norms[l - 1] * xi[t - l];
        out.push_back(p.intercept + p.prefactor * s);
    }
    return out;
}

double q_bound_bounded(const QBoundParams& p, std::size_t m, double eta_bound) {
    if (!(eta_bound >= 0.0)) throw DomainError("q_bound_bounded: bound must be nonnegative");
    const double xi_max = static_cast<double>(m) * eta_bound * eta_bound / (1.0 - p.t33_norm);
    double s = 0.0;
    for (double n : p.n_lift_norms) s += n;
    return p.intercept + p.prefactor * s * xi_max;
}

QBoundTracker::QBoundTracker(const DccSpec& spec, double x0_norm)
    : w0_vech_(vech(spec.W0)), t33_norm_(norm_spectral(build_T33(spec))), bound_(x0_norm) {
    const SymIndexMap idx(spec.m);
    for (const auto& nl : spec.N) n_lifts_.push_back(lift_congruence(nl, idx));
}

double QBoundTracker::advance(const std::deque<Vector>& eps_lags) {
    if (eps_lags.size() < n_lifts_.size()) throw DomainError("QBoundTracker: too few eps lags");
    Vector pi = w0_vech_;
    for (std::size_t l = 0; l < n_lifts_.size(); ++l) {
        pi += n_lifts_[l] * vech(eps_lags[l] * eps_lags[l].transpose());
    }
    bound_ = t33_norm_ * bound_ + pi.norm();
    return bound_;
}

LogMomentCheck check_uniqueness_scalar_log_moment(const DccSpec& spec, const InnovationSpec& innov,
                                                  std::size_t samples, double c_lambda,
                                                  double c_q, bool paired) {
    const ModelStructure st = detect_structure(spec);
    if (st.kind != StructureKind::Scalar || spec.r() != 1 || spec.s() != 1 || spec.nu() != 1 ||
        spec.mu() != 1) {
        throw StructureError("log-moment check needs a scalar model of order one");
    }
    if (samples < kBatches) throw DomainError(fmt::format("log-moment check needs >= {} samples", kBatches));
    innov.validate();
    const QBoundParams params = q_bound_params(spec);
    const NStarSampler nstar(spec, c_lambda, c_q);
    const double m_sq = st.m_coefs[0] * st.m_coefs[0];
    const double n_sq = st.n_coefs[0] * st.n_coefs[0];

    InnovationSpec eta_spec = innov;
    eta_spec.stream = innov.stream ^ kLogMomentEtaStream;
    InnovationSpec xi_spec = innov;
    xi_spec.stream = innov.stream ^ kLogMomentXiStream;
    InnovationSampler eta_sampler(eta_spec);
    InnovationSampler xi_sampler(paired ? eta_spec : xi_spec);

    const double mean_sq = innov.mean_norm_sq(spec.m);
    double xi = std::isfinite(mean_sq) ? mean_sq / (1.0 - params.t33_norm) : 0.0;
    for (std::size_t t = 0; t < params.burn_in; ++t) {
        xi = params.t33_norm * xi + xi_sampler.draw(spec.m).squaredNorm();
    }

    const std::size_t per_batch = samples / kBatches;
    const std::size_t used = per_batch * kBatches;
    std::vector<double> batch_means(kBatches, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
        const double q = params.intercept + params.prefactor * params.n_lift_norms[0] * xi;
        double e2 = 0.0;
        if (paired) {
            e2 = xi_sampler.draw(spec.m).squaredNorm();
            xi = params.t33_norm * xi + e2;
        } else {
            e2 = eta_sampler.draw(spec.m).squaredNorm();
            xi = params.t33_norm * xi + xi_sampler.draw(spec.m).squaredNorm();
        }
        const double v = std::log(m_sq + n_sq * nstar.multiplier() * e2 * std::sqrt(q));
        batch_means[i / per_batch] += v;
        total += v;
    }
    LogMomentCheck out;
    out.samples = used;
    out.paired = paired;
    out.multiplier = nstar.multiplier();
    out.expectation = total / static_cast<double>(used);
    double ss = 0.0;
    for (auto& b : batch_means) {
        b /= static_cast<double>(per_batch);
        ss += (b - out.expectation) * (b - out.expectation);
    }
    out.std_error = std::sqrt(ss / static_cast<double>(kBatches - 1) / static_cast<double>(kBatches));
    out.pass = out.expectation + 2.0 * out.std_error < 0.0;
    return out;
}

namespace {

LyapunovCheck lyapunov_check(const DccSpec& spec, const InnovationSpec& innov, const McSettings& mc,
                             double c_lambda, double c_q, bool starred) {
    const LyapunovEstimate est =
        estimate_lyapunov_N(spec, innov, c_lambda, c_q, mc.horizon, mc.replications, mc.threads);
    LyapunovCheck out;
    out.gamma_hat = est.gamma_hat;
    out.std_error = est.std_error;
    out.upper_bound = est.upper_bound;
    out.upper_bound_se = est.upper_bound_se;
    out.horizon = est.horizon;
    out.replications = est.replications;
    out.rescalings = est.rescalings;
    out.starred = starred;
    out.pass = est.gamma_hat + 2.0 * est.std_error < 0.0;
    return out;
}

}  // namespace

StationarityReport full_report(const DccSpec& spec, const InnovationSpec& innov,
                               const McSettings& mc, NormKind norm, bool run_uniqueness) {
    require_valid(spec);
    innov.validate();
    StationarityReport rep;
    rep.structure = detect_structure(spec);
    rep.constants = compute_constants(spec);

    auto& ex = rep.existence;
    ex.spectral_radius = check_existence_spectral(spec);
    ex.norm_sums = check_existence_norms(spec, norm);
    const auto kind = rep.structure.kind;
    if (kind == StructureKind::Diagonal || kind == StructureKind::Scalar) {
        ex.diagonal_margin_sums = check_diagonal_margins(spec);
    }
    if (kind == StructureKind::Scalar) ex.scalar_coefficient_sums = check_scalar_coefficients(spec);
    ex.finite_innovation_variance = std::isfinite(innov.mean_norm_sq(spec.m));
    const bool any_condition = ex.spectral_radius.pass || ex.norm_sums.pass ||
                               (ex.diagonal_margin_sums && ex.diagonal_margin_sums->pass) ||
                               (ex.scalar_coefficient_sums && ex.scalar_coefficient_sums->pass);
    ex.pass = any_condition && ex.finite_innovation_variance;
    if (ex.pass) {
        ex.verdict = "sufficient condition satisfied: a strictly stationary solution with finite "
                     "second moments exists";
    } else if (any_condition) {
        ex.verdict = "no sufficient condition satisfied: parameter conditions hold but the "
                     "innovations lack a finite second moment";
    } else {
        ex.verdict = "no sufficient condition satisfied";
    }
    if (!ex.finite_innovation_variance) {
        rep.warnings.push_back("innovations have infinite variance; moment-based conditions do not apply");
    }

    auto& un = rep.uniqueness;
    un.t33_norm = norm_spectral(build_T33(spec));
    un.t33_contraction = un.t33_norm < 1.0;
    un.rho_t_bar = spectral_radius(build_T_bar_star(spec));
    un.volatility_companion = un.rho_t_bar < 1.0;
    un.partially_scalar_applicable = rep.structure.m_scalar;
    if (un.partially_scalar_applicable) {
        un.rho_m_star = spectral_radius(build_M_star(spec));
        un.partially_scalar = un.rho_m_star < 1.0;
    }
    if (un.t33_contraction) {
        const QBoundParams qp = q_bound_params(spec);
        if (qp.near_unit_root) {
            rep.warnings.push_back(fmt::format(
                "||T33||_s = {} is close to one; the bound process forgets its start slowly "
                "(burn-in {} steps)", un.t33_norm, qp.burn_in));
        }
    }
    if (run_uniqueness && un.t33_contraction) {
        un.evaluated = true;
        un.lyapunov_n_star =
            lyapunov_check(spec, innov, mc, rep.constants.c_lambda, rep.constants.c_q, false);
        if (un.partially_scalar && rep.constants.c_lambda_star) {
            un.lyapunov_n_star_starred = lyapunov_check(spec, innov, mc, *rep.constants.c_lambda_star,
                                                        *rep.constants.c_q_star, true);
        }
        if (kind == StructureKind::Scalar && spec.r() == 1 && spec.s() == 1 && spec.nu() == 1 &&
            spec.mu() == 1) {
            un.scalar_log_moment = check_uniqueness_scalar_log_moment(
                spec, innov, mc.samples, rep.constants.c_lambda, rep.constants.c_q);
        }
        un.lyapunov_condition = un.lyapunov_n_star->pass ||
                                (un.lyapunov_n_star_starred && un.lyapunov_n_star_starred->pass) ||
                                (un.scalar_log_moment && un.scalar_log_moment->pass);
    }
    if (un.t33_contraction) un.conditions_held.push_back("t33_contraction");
    if (un.lyapunov_condition) un.conditions_held.push_back("lyapunov_n_star");
    if (un.volatility_companion) un.conditions_held.push_back("volatility_companion");
    if (un.partially_scalar) un.conditions_held.push_back("partially_scalar");
    un.pass = un.t33_contraction && un.volatility_companion && un.lyapunov_condition;
    if (un.pass) {
        un.verdict = "established: the stationary solution is unique and ergodic";
    } else if (!un.evaluated && run_uniqueness) {
        un.verdict = "not established: ||T33||_s >= 1, the Lyapunov condition cannot be formed";
    } else if (!un.evaluated) {
        un.verdict = "not evaluated";
    } else {
        un.verdict = "not established";
    }
    return rep;
}

}  // namespace dcc
