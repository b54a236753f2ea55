#include "dcc/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace dcc {

void SimConfig::validate(std::size_t m) const {
    if (horizon == 0) throw DomainError("sim: horizon must be positive");
    if (burn_in >= horizon) throw DomainError("sim: burn_in must be smaller than horizon");
    if (stride == 0) throw DomainError("sim: stride must be positive");
    if (!(explode_threshold > 0.0)) throw DomainError("sim: explode_threshold must be positive");
    if (static_cast<std::size_t>(Q0.rows()) != m || static_cast<std::size_t>(Q0.cols()) != m) {
        throw DomainError(fmt::format("sim: Q0 must be {}x{}", m, m));
    }
    SpdMatrix check(Q0);
    if (static_cast<std::size_t>(h0.size()) != m) {
        throw DomainError(fmt::format("sim: h0 must have length {}", m));
    }
    if (!((h0.array() > 0.0).all())) throw DomainError("sim: h0 must be strictly positive");
}

SimConfig SimConfig::reference(std::size_t m, std::size_t horizon) {
    SimConfig cfg;
    const auto dim = static_cast<Eigen::Index>(m);
    cfg.horizon = horizon;
    cfg.Q0 = Matrix::Identity(dim, dim);
    cfg.h0 = Vector::Constant(dim, 0.5);
    return cfg;
}

StateVector SimState::to_state_vector(const StateLayout& layout) const {
    StateHistories hist;
    hist.vol.assign(vol.begin(), vol.end());
    hist.sq_returns.assign(sq_returns.begin(), sq_returns.end());
    hist.q.assign(q.begin(), q.end());
    for (const auto& e : eps) hist.eps_outer.push_back(e * e.transpose());
    return pack_state(hist, layout);
}

namespace {

Matrix correlation_of(const Matrix& q) {
    const auto m = q.rows();
    Matrix r(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        r(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = q(i, j) / std::sqrt(q(i, i) * q(j, j));
            r(i, j) = v;
            r(j, i) = v;
        }
    }
    return r;
}

}  // namespace

SimState initial_state(const DccSpec& spec, const SimConfig& cfg, InnovationSampler& sampler) {
    cfg.validate(spec.m);
    SimState st;
    const Matrix r0_root = sqrt_psd(correlation_of(cfg.Q0));
    const Vector d0_root = cfg.h0.cwiseSqrt();
    const std::size_t pre = std::max(spec.mu(), spec.s());
    std::vector<Vector> eps_pre;
    for (std::size_t l = 0; l < pre; ++l) eps_pre.push_back(r0_root * sampler.draw(spec.m));
    for (std::size_t i = 0; i < spec.r(); ++i) st.vol.push_back(cfg.h0);
    for (std::size_t j = 0; j < spec.s(); ++j)
        st.sq_returns.push_back(d0_root.cwiseProduct(eps_pre[j]).cwiseAbs2());
    for (std::size_t k = 0; k < spec.nu(); ++k) st.q.push_back(cfg.Q0);
    for (std::size_t l = 0; l < spec.mu(); ++l) st.eps.push_back(eps_pre[l]);
    return st;
}

StepRecord step(const DccSpec& spec, SimState& state, const Vector& eta) {
    if (static_cast<std::size_t>(eta.size()) != spec.m) throw DomainError("step: eta has wrong length");
    StepRecord rec;
    rec.t = state.t + 1;
    rec.eta = eta;

    Vector h = spec.V0;
    for (std::size_t i = 0; i < spec.r(); ++i) h += spec.A[i] * state.vol[i];
    for (std::size_t j = 0; j < spec.s(); ++j) h += spec.B[j] * state.sq_returns[j];

    Matrix q = spec.W0;
    for (std::size_t k = 0; k < spec.nu(); ++k) q += spec.M[k] * state.q[k] * spec.M[k].transpose();
    for (std::size_t l = 0; l < spec.mu(); ++l) {
        const Vector ne = spec.N[l] * state.eps[l];
        q += ne * ne.transpose();
    }
    q = 0.5 * (q + q.transpose());
    rec.h = h;
    rec.q_norm_max = norm_max(q);

    if (!h.allFinite() || !q.allFinite()) {
        rec.overflow = true;
        return rec;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> qes(q, Eigen::EigenvaluesOnly);
    rec.lambda_min_q = qes.eigenvalues()(0);
    if (!(rec.lambda_min_q > 0.0)) {
        throw NumericError(fmt::format("step t={}: Q_t lost positive definiteness (lambda_min={})",
                                       rec.t, rec.lambda_min_q));
    }

    const Matrix r = correlation_of(q);
    Eigen::SelfAdjointEigenSolver<Matrix> res(r);
    rec.lambda_min_r = res.eigenvalues()(0);
    const Vector ev = res.eigenvalues().cwiseMax(0.0);
    if (res.eigenvalues()(0) < -1e-12) {
        throw NumericError(fmt::format("step t={}: R_t not positive semidefinite (lambda_min={})",
                                       rec.t, res.eigenvalues()(0)));
    }
    const Matrix r_root = res.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                          res.eigenvectors().transpose();
    const Vector eps = r_root * eta;
    const Vector z = h.cwiseSqrt().cwiseProduct(eps);

    rec.eps = eps;
    rec.z = z;
    rec.vech_q = vech(q);
    rec.vech_r = vech(r);
    if (!z.allFinite()) rec.overflow = true;

    state.vol.push_front(h);
    state.vol.pop_back();
    state.sq_returns.push_front(z.cwiseAbs2());
    state.sq_returns.pop_back();
    state.q.push_front(std::move(q));
    state.q.pop_back();
    state.eps.push_front(eps);
    state.eps.pop_back();
    state.t = rec.t;
    return rec;
}

void InvariantStats::update(const DccSpec& spec, const StepRecord& rec) {
    min_lambda_q = std::min(min_lambda_q, rec.lambda_min_q);
    min_lambda_r = std::min(min_lambda_r, rec.lambda_min_r);
    const SymIndexMap idx(spec.m);
    for (Eigen::Index k = 0; k < rec.vech_r.size(); ++k) {
        const auto [i, j] = idx.pair(static_cast<std::size_t>(k));
        if (i == j) {
            max_r_diag_error = std::max(max_r_diag_error, std::abs(rec.vech_r(k) - 1.0));
        } else {
            max_abs_r_offdiag = std::max(max_abs_r_offdiag, std::abs(rec.vech_r(k)));
        }
    }
    min_h_margin = std::min(min_h_margin, (rec.h - spec.V0).minCoeff());
}

bool TrajectorySummary::moment_stable() const {
    return !error && !exploded() && std::isfinite(second_moment_ratio) &&
           second_moment_ratio >= 0.5 && second_moment_ratio <= 2.0;
}

namespace {

Vector offdiag_of(const Vector& vech_r, std::size_t m) {
    const SymIndexMap idx(m);
    Vector out(static_cast<Eigen::Index>(m * (m - 1) / 2));
    Eigen::Index n = 0;
    for (Eigen::Index k = 0; k < vech_r.size(); ++k) {
        const auto [i, j] = idx.pair(static_cast<std::size_t>(k));
        if (i != j) out(n++) = vech_r(k);
    }
    return out;
}

TrajectorySummary run_core(const DccSpec& spec, const SimConfig& cfg, const InnovationSpec& innov,
                           std::uint64_t run, std::vector<StepRecord>* records) {
    require_valid(spec);
    cfg.validate(spec.m);
    InnovationSampler sampler(innov, run);
    SimState state = initial_state(spec, cfg, sampler);

    TrajectorySummary sum;
    sum.horizon = cfg.horizon;
    const std::size_t tenth = std::max<std::size_t>(cfg.horizon / 10, 1);
    const std::size_t mid = cfg.burn_in + (cfg.horizon - cfg.burn_in) / 2;
    double half_sum[2] = {0.0, 0.0};
    std::size_t half_n[2] = {0, 0};
    std::size_t window_n = 0;

    for (std::size_t t = 1; t <= cfg.horizon; ++t) {
        const Vector eta = sampler.draw(spec.m);
        StepRecord rec = step(spec, state, eta);
        if (rec.overflow) {
            sum.first_explosion_time = t;
            break;
        }
        sum.steps_completed = t;
        sum.invariants.update(spec, rec);
        sum.max_q_norm = std::max(sum.max_q_norm, rec.q_norm_max);
        sum.q_norm_final = rec.q_norm_max;
        if (t == tenth) sum.q_norm_tenth = rec.q_norm_max;
        sum.terminal_r_offdiag = offdiag_of(rec.vech_r, spec.m);
        if (t > cfg.burn_in) {
            const Vector az = rec.z.cwiseAbs();
            for (int p = 0; p < 4; ++p) sum.z_moments[p] += az.array().pow(p + 1).sum();
            ++window_n;
            const int half = t <= mid ? 0 : 1;
            half_sum[half] += rec.z.squaredNorm();
            ++half_n[half];
        }
        const bool exploded = rec.q_norm_max > cfg.explode_threshold;
        if (records && t > cfg.burn_in && ((t - cfg.burn_in - 1) % cfg.stride == 0 || exploded)) {
            records->push_back(std::move(rec));
        }
        if (exploded) {
            sum.first_explosion_time = t;
            break;
        }
    }
    if (window_n > 0)
        for (auto& mom : sum.z_moments) mom /= static_cast<double>(window_n);
    if (half_n[0] > 0 && half_n[1] > 0 && half_sum[0] > 0.0) {
        sum.second_moment_ratio = (half_sum[1] / static_cast<double>(half_n[1])) /
                                  (half_sum[0] / static_cast<double>(half_n[0]));
    } else {
        sum.second_moment_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return sum;
}

}  // namespace

Trajectory simulate(const DccSpec& spec, const SimConfig& cfg, const InnovationSpec& innov,
                    std::uint64_t run) {
    Trajectory traj;
    traj.records.reserve(cfg.horizon / cfg.stride + 1);
    traj.summary = run_core(spec, cfg, innov, run, &traj.records);
    return traj;
}

TrajectorySummary simulate_summary(const DccSpec& spec, const SimConfig& cfg,
                                   const InnovationSpec& innov, std::uint64_t run) {
    return run_core(spec, cfg, innov, run, nullptr);
}

std::vector<MomentEstimate> moment_diagnostics(const Trajectory& traj,
                                               const std::vector<double>& orders) {
    if (traj.summary.exploded()) {
        throw DomainError("moment_diagnostics: trajectory exploded at t=" +
                          std::to_string(*traj.summary.first_explosion_time));
    }
    const auto& recs = traj.records;
    if (recs.size() < 2) throw DomainError("moment_diagnostics: need at least two records");
    const std::size_t n = recs.size();
    const std::size_t mid = n / 2;
    struct Series {
        const char* name;
        Vector StepRecord::*field;
    };
    const Series series[] = {{"z", &StepRecord::z},
                             {"eps", &StepRecord::eps},
                             {"h", &StepRecord::h},
                             {"Q", &StepRecord::vech_q}};
    std::vector<MomentEstimate> out;
    for (const auto& s : series) {
        const auto width = (recs.front().*(s.field)).size();
        for (Eigen::Index c = 0; c < width; ++c) {
            for (double p : orders) {
                double sum = 0.0, sum_sq = 0.0, first = 0.0, second = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double v = std::pow(std::abs((recs[i].*(s.field))(c)), p);
                    sum += v;
                    sum_sq += v * v;
                    (i < mid ? first : second) += v;
                }
                MomentEstimate est;
                est.series = s.name;
                est.component = static_cast<std::size_t>(c);
                est.order = p;
                const double dn = static_cast<double>(n);
                est.mean = sum / dn;
                const double var = std::max(sum_sq / dn - est.mean * est.mean, 0.0);
                est.std_error = std::sqrt(var / dn);
                est.first_half = first / static_cast<double>(mid);
                est.second_half = second / static_cast<double>(n - mid);
                out.push_back(est);
            }
        }
    }
    return out;
}

}  // namespace dcc
