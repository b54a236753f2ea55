#pragma once

// Markov-chain form X_t = T_t X_{t-1} + zeta_t of a DCC model.
//
// X_t stacks four blocks, most recent lag first:
//   X1 = (Vecd(D_t), ..., Vecd(D_{t-r+1}))          length r*m
//   X2 = (z_t.^2, ..., z_{t-s+1}.^2)                 length s*m
//   X3 = (vech(Q_t), ..., vech(Q_{t-nu+1}))          length nu*m*
//   X4 = (vech(eps_t eps_t'), ..., lag mu-1)         length mu*m*

#include <vector>

#include "dcc/matrix_kit.hpp"
#include "dcc/model.hpp"

namespace dcc {

struct Block {
    Eigen::Index offset = 0;
    Eigen::Index length = 0;
};

class StateLayout {
public:
    StateLayout(std::size_t m, std::size_t r, std::size_t s, std::size_t nu, std::size_t mu);
    explicit StateLayout(const DccSpec& spec);

    std::size_t m() const { return m_; }
    std::size_t half() const { return half_dim(m_); }
    std::size_t r() const { return r_; }
    std::size_t s() const { return s_; }
    std::size_t nu() const { return nu_; }
    std::size_t mu() const { return mu_; }
    Eigen::Index dim() const { return dim_; }

    Block vol() const { return vol_; }
    Block sq_returns() const { return sq_; }
    Block corr() const { return q_; }
    Block outer() const { return eps_; }

private:
    std::size_t m_, r_, s_, nu_, mu_;
    Block vol_, sq_, q_, eps_;
    Eigen::Index dim_;
};

/// Lag histories, most recent first.
struct StateHistories {
    std::vector<Vector> vol;         // Vecd(D_{t-i}), r entries
    std::vector<Vector> sq_returns;  // z_{t-j}.^2, s entries
    std::vector<Matrix> q;           // Q_{t-k}, nu entries (SPD)
    std::vector<Matrix> eps_outer;   // eps_{t-l} eps_{t-l}', mu entries
};

struct StateVector {
    StateLayout layout;
    Vector data;

    auto block(Block b) const { return data.segment(b.offset, b.length); }
    Vector vol_lag(std::size_t i) const;
    Vector sq_return_lag(std::size_t j) const;
    Matrix q_lag(std::size_t k) const;
    Matrix eps_outer_lag(std::size_t l) const;
};

StateVector pack_state(const StateHistories& hist, const StateLayout& layout);
StateHistories unpack_state(const StateVector& x);

struct AffineStep {
    Matrix T;
    Vector zeta;
};

/// (T_t, zeta_t) given the period-t standardized residual eps_t.
AffineStep build_affine_step(const DccSpec& spec, const Vector& eps_t);
/// Transition matrix only, with eps_t .^ 2 replaced by an arbitrary weight vector.
Matrix build_transition(const DccSpec& spec, const Vector& eps_sq);

/// |T_t| with eps_t.^2 replaced by ones.
Matrix build_T_star(const DccSpec& spec);
/// Volatility block [[T11, T12], [T21, T22]] with eps_t.^2 replaced by ones.
Matrix build_T_bar_star(const DccSpec& spec);
/// Companion of the congruence lifts of M_1..M_nu (time invariant).
Matrix build_T33(const DccSpec& spec);
/// nu x nu companion with top row (m_1^2, ..., m_nu^2). Needs M_k = m_k I.
Matrix build_M_star(const DccSpec& spec);

/// Companion matrix with the given top row and unit subdiagonal.
Matrix companion(const std::vector<double>& top_row);

/// Draws of the kappa x kappa companion N*_t, kappa = max(nu, mu):
///   beta_j = 1(j<=nu) ||M_j||_s^2
///          + 1(j<=mu) ||N_j||_s^2 * 4(2m+1)sqrt(m) / (sqrt(c_lambda) c_q) * ||eta||^2 * sqrt(q)
class NStarSampler {
public:
    NStarSampler(const DccSpec& spec, double c_lambda, double c_q);

    std::size_t kappa() const { return m_norm_sq_.size(); }
    double multiplier() const { return multiplier_; }
    std::vector<double> betas(double eta_norm_sq, double q) const;
    Matrix sample(double eta_norm_sq, double q) const { return companion(betas(eta_norm_sq, q)); }

private:
    std::vector<double> m_norm_sq_;  // padded with zeros to kappa
    std::vector<double> n_norm_sq_;
    double multiplier_;
};

Matrix build_N_star_sample(const DccSpec& spec, double eta_norm_sq, double q, double c_lambda,
                           double c_q);

}  // namespace dcc
