#include "dcc/chain.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace dcc {

StateLayout::StateLayout(std::size_t m, std::size_t r, std::size_t s, std::size_t nu,
                         std::size_t mu)
    : m_(m), r_(r), s_(s), nu_(nu), mu_(mu) {
    if (m == 0) throw DomainError("StateLayout: m must be positive");
    const auto mi = static_cast<Eigen::Index>(m);
    const auto hi = static_cast<Eigen::Index>(half_dim(m));
    vol_ = {0, static_cast<Eigen::Index>(r) * mi};
    sq_ = {vol_.offset + vol_.length, static_cast<Eigen::Index>(s) * mi};
    q_ = {sq_.offset + sq_.length, static_cast<Eigen::Index>(nu) * hi};
    eps_ = {q_.offset + q_.length, static_cast<Eigen::Index>(mu) * hi};
    dim_ = eps_.offset + eps_.length;
}

StateLayout::StateLayout(const DccSpec& spec)
    : StateLayout(spec.m, spec.r(), spec.s(), spec.nu(), spec.mu()) {}

Vector StateVector::vol_lag(std::size_t i) const {
    const auto m = static_cast<Eigen::Index>(layout.m());
    return data.segment(layout.vol().offset + static_cast<Eigen::Index>(i) * m, m);
}

Vector StateVector::sq_return_lag(std::size_t j) const {
    const auto m = static_cast<Eigen::Index>(layout.m());
    return data.segment(layout.sq_returns().offset + static_cast<Eigen::Index>(j) * m, m);
}

Matrix StateVector::q_lag(std::size_t k) const {
    const auto h = static_cast<Eigen::Index>(layout.half());
    return unvech(data.segment(layout.corr().offset + static_cast<Eigen::Index>(k) * h, h));
}

Matrix StateVector::eps_outer_lag(std::size_t l) const {
    const auto h = static_cast<Eigen::Index>(layout.half());
    return unvech(data.segment(layout.outer().offset + static_cast<Eigen::Index>(l) * h, h));
}

StateVector pack_state(const StateHistories& hist, const StateLayout& layout) {
    if (hist.vol.size() != layout.r() || hist.sq_returns.size() != layout.s() ||
        hist.q.size() != layout.nu() || hist.eps_outer.size() != layout.mu()) {
        throw DomainError(fmt::format(
            "pack_state: history lengths ({},{},{},{}) do not match orders ({},{},{},{})",
            hist.vol.size(), hist.sq_returns.size(), hist.q.size(), hist.eps_outer.size(),
            layout.r(), layout.s(), layout.nu(), layout.mu()));
    }
    const auto m = static_cast<Eigen::Index>(layout.m());
    const auto h = static_cast<Eigen::Index>(layout.half());
    StateVector x{layout, Vector::Zero(layout.dim())};
    auto put_vec = [&](const std::vector<Vector>& src, Block blk, const char* what) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i].size() != m) throw DomainError(fmt::format("pack_state: {} lag {} has wrong length", what, i));
            x.data.segment(blk.offset + static_cast<Eigen::Index>(i) * m, m) = src[i];
        }
    };
    put_vec(hist.vol, layout.vol(), "volatility");
    put_vec(hist.sq_returns, layout.sq_returns(), "squared-return");
    for (std::size_t k = 0; k < hist.q.size(); ++k) {
        const Matrix& q = hist.q[k];
        if (q.rows() != m || q.cols() != m) throw DomainError("pack_state: Q lag has wrong shape");
        SpdMatrix check(q);  // throws unless SPD
        x.data.segment(layout.corr().offset + static_cast<Eigen::Index>(k) * h, h) = vech(q);
    }
    for (std::size_t l = 0; l < hist.eps_outer.size(); ++l) {
        const Matrix& e = hist.eps_outer[l];
        if (e.rows() != m || e.cols() != m) throw DomainError("pack_state: eps lag has wrong shape");
        x.data.segment(layout.outer().offset + static_cast<Eigen::Index>(l) * h, h) = vech(e);
    }
    return x;
}

StateHistories unpack_state(const StateVector& x) {
    StateHistories hist;
    for (std::size_t i = 0; i < x.layout.r(); ++i) hist.vol.push_back(x.vol_lag(i));
    for (std::size_t j = 0; j < x.layout.s(); ++j) hist.sq_returns.push_back(x.sq_return_lag(j));
    for (std::size_t k = 0; k < x.layout.nu(); ++k) hist.q.push_back(x.q_lag(k));
    for (std::size_t l = 0; l < x.layout.mu(); ++l) hist.eps_outer.push_back(x.eps_outer_lag(l));
    return hist;
}

namespace {

// Unit subdiagonal blocks: lag i+1 receives lag i.
void shift_blocks(Matrix& t, Block blk, Eigen::Index width, std::size_t lags) {
    for (std::size_t i = 1; i < lags; ++i) {
        const auto row = blk.offset + static_cast<Eigen::Index>(i) * width;
        const auto col = blk.offset + static_cast<Eigen::Index>(i - 1) * width;
        t.block(row, col, width, width).setIdentity();
    }
}

}  // namespace

Matrix build_transition(const DccSpec& spec, const Vector& eps_sq) {
    const StateLayout lay(spec);
    if (static_cast<std::size_t>(eps_sq.size()) != spec.m) {
        throw DomainError("build_affine_step: eps_t has wrong length");
    }
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto h = static_cast<Eigen::Index>(lay.half());
    const SymIndexMap idx(spec.m);
    Matrix t = Matrix::Zero(lay.dim(), lay.dim());

    // T11, T21: lags of Vecd(D)
    for (std::size_t i = 0; i < spec.r(); ++i) {
        const auto col = lay.vol().offset + static_cast<Eigen::Index>(i) * m;
        t.block(lay.vol().offset, col, m, m) = spec.A[i];
        t.block(lay.sq_returns().offset, col, m, m) = eps_sq.asDiagonal() * spec.A[i];
    }
    shift_blocks(t, lay.vol(), m, spec.r());
    // T12, T22: lags of squared returns
    for (std::size_t j = 0; j < spec.s(); ++j) {
        const auto col = lay.sq_returns().offset + static_cast<Eigen::Index>(j) * m;
        t.block(lay.vol().offset, col, m, m) = spec.B[j];
        t.block(lay.sq_returns().offset, col, m, m) = eps_sq.asDiagonal() * spec.B[j];
    }
    shift_blocks(t, lay.sq_returns(), m, spec.s());
    // T33, T34
    for (std::size_t k = 0; k < spec.nu(); ++k) {
        const auto col = lay.corr().offset + static_cast<Eigen::Index>(k) * h;
        t.block(lay.corr().offset, col, h, h) = lift_congruence(spec.M[k], idx);
    }
    shift_blocks(t, lay.corr(), h, spec.nu());
    for (std::size_t l = 0; l < spec.mu(); ++l) {
        const auto col = lay.outer().offset + static_cast<Eigen::Index>(l) * h;
        t.block(lay.corr().offset, col, h, h) = lift_congruence(spec.N[l], idx);
    }
    // T44: pure shift
    shift_blocks(t, lay.outer(), h, spec.mu());
    return t;
}

AffineStep build_affine_step(const DccSpec& spec, const Vector& eps_t) {
    if (static_cast<std::size_t>(eps_t.size()) != spec.m) {
        throw DomainError("build_affine_step: eps_t has wrong length");
    }
    const StateLayout lay(spec);
    const Vector eps_sq = eps_t.cwiseAbs2();
    AffineStep step{build_transition(spec, eps_sq), Vector::Zero(lay.dim())};
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto h = static_cast<Eigen::Index>(lay.half());
    step.zeta.segment(lay.vol().offset, m) = spec.V0;
    step.zeta.segment(lay.sq_returns().offset, m) = eps_sq.cwiseProduct(spec.V0);
    step.zeta.segment(lay.corr().offset, h) = vech(spec.W0);
    step.zeta.segment(lay.outer().offset, h) = vech(eps_t * eps_t.transpose());
    return step;
}

Matrix build_T_star(const DccSpec& spec) {
    return build_transition(spec, Vector::Ones(static_cast<Eigen::Index>(spec.m))).cwiseAbs();
}

Matrix build_T_bar_star(const DccSpec& spec) {
    const StateLayout lay(spec);
    const auto n = lay.vol().length + lay.sq_returns().length;
    return build_transition(spec, Vector::Ones(static_cast<Eigen::Index>(spec.m)))
        .topLeftCorner(n, n);
}

Matrix build_T33(const DccSpec& spec) {
    const StateLayout lay(spec);
    const auto h = static_cast<Eigen::Index>(lay.half());
    const SymIndexMap idx(spec.m);
    Matrix t = Matrix::Zero(lay.corr().length, lay.corr().length);
    for (std::size_t k = 0; k < spec.nu(); ++k)
        t.block(0, static_cast<Eigen::Index>(k) * h, h, h) = lift_congruence(spec.M[k], idx);
    shift_blocks(t, Block{0, t.rows()}, h, spec.nu());
    return t;
}

Matrix companion(const std::vector<double>& top_row) {
    const auto n = static_cast<Eigen::Index>(top_row.size());
    Matrix c = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) c(0, j) = top_row[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < n; ++i) c(i, i - 1) = 1.0;
    return c;
}

Matrix build_M_star(const DccSpec& spec) {
    std::vector<double> row;
    for (const auto& mk : spec.M) {
        double c = 0.0;
        if (!is_scalar_identity(mk, &c)) {
            throw StructureError("build_M_star: M_k is not a multiple of the identity");
        }
        row.push_back(c * c);
    }
    return companion(row);
}

NStarSampler::NStarSampler(const DccSpec& spec, double c_lambda, double c_q) {
    if (!(c_lambda > 0.0) || !(c_q > 0.0)) {
        throw DomainError("NStarSampler: bound constants must be positive");
    }
    const std::size_t kappa = std::max(spec.nu(), spec.mu());
    m_norm_sq_.assign(kappa, 0.0);
    n_norm_sq_.assign(kappa, 0.0);
    for (std::size_t k = 0; k < spec.nu(); ++k) m_norm_sq_[k] = std::pow(norm_spectral(spec.M[k]), 2);
    for (std::size_t l = 0; l < spec.mu(); ++l) n_norm_sq_[l] = std::pow(norm_spectral(spec.N[l]), 2);
    const double m = static_cast<double>(spec.m);
    multiplier_ = 4.0 * (2.0 * m + 1.0) * std::sqrt(m) / (std::sqrt(c_lambda) * c_q);
}

std::vector<double> NStarSampler::betas(double eta_norm_sq, double q) const {
    if (eta_norm_sq < 0.0 || q < 0.0) throw DomainError("NStarSampler: negative input");
    const double loading = multiplier_ * eta_norm_sq * std::sqrt(q);
    std::vector<double> beta(m_norm_sq_.size());
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = m_norm_sq_[j] + n_norm_sq_[j] * loading;
    return beta;
}

Matrix build_N_star_sample(const DccSpec& spec, double eta_norm_sq, double q, double c_lambda,
                           double c_q) {
    return NStarSampler(spec, c_lambda, c_q).sample(eta_norm_sq, q);
}

}  // namespace dcc
