#pragma once

// Shared generators and brute-force oracles for the test binaries.

#include <cmath>
#include <random>

#include "dcc/chain.hpp"
#include "dcc/matrix_kit.hpp"
#include "dcc/model.hpp"

namespace dcc::testing {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> nd;
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = nd(rng);
    return a;
}

inline Matrix random_spd(std::mt19937_64& rng, std::size_t m, double floor = 0.2) {
    const Matrix g = random_matrix(rng, m, m);
    const auto dim = static_cast<Eigen::Index>(m);
    Matrix s = g * g.transpose() / static_cast<double>(m) + floor * Matrix::Identity(dim, dim);
    return 0.5 * (s + s.transpose());
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t m) {
    const Matrix g = random_matrix(rng, m, m);
    return 0.5 * (g + g.transpose());
}

inline Matrix random_nonnegative(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = u(rng);
    return a;
}

/// vech(M Q M') by definition, entry by entry.
inline Vector brute_lift_image(const Matrix& m, const Matrix& q) {
    const Matrix c = m * q * m.transpose();
    return vech(c);
}

/// Column l of the lift is vech(M E_l M') with E_l the symmetric unit matrix of vech position l.
inline Matrix brute_lift(const Matrix& m) {
    const auto n = static_cast<std::size_t>(m.rows());
    const SymIndexMap idx(n);
    Matrix out(static_cast<Eigen::Index>(idx.half()), static_cast<Eigen::Index>(idx.half()));
    for (std::size_t l = 0; l < idx.half(); ++l) {
        const auto [i, j] = idx.pair(l);
        Matrix e = Matrix::Zero(m.rows(), m.cols());
        e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
        e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        out.col(static_cast<Eigen::Index>(l)) = vech(m * e * m.transpose());
    }
    return out;
}

struct Orders {
    std::size_t r = 1, s = 1, nu = 1, mu = 1;
};

/// Valid spec with volatility loadings of total induced-inf norm `vol_budget`,
/// correlation loadings with sum ||M_k||_s^2 = `corr_budget` and ||N_l||_s = n_norm.
inline DccSpec random_spec(std::mt19937_64& rng, std::size_t m, Orders o, double vol_budget,
                           double corr_budget, double n_norm = 0.3) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    DccSpec spec;
    spec.m = m;
    spec.V0 = Vector(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < spec.V0.size(); ++i) spec.V0(i) = 0.1 + u(rng);

    std::vector<Matrix> vol;
    for (std::size_t i = 0; i < o.r + o.s; ++i) vol.push_back(random_nonnegative(rng, m));
    std::vector<double> w(vol.size());
    double wsum = 0.0;
    for (auto& x : w) wsum += (x = u(rng));
    for (std::size_t i = 0; i < vol.size(); ++i) {
        vol[i] *= vol_budget * w[i] / wsum / norm_induced_inf(vol[i]);
    }
    spec.A.assign(vol.begin(), vol.begin() + static_cast<long>(o.r));
    spec.B.assign(vol.begin() + static_cast<long>(o.r), vol.end());

    std::vector<double> cw(o.nu);
    double cwsum = 0.0;
    for (auto& x : cw) cwsum += (x = u(rng));
    for (std::size_t k = 0; k < o.nu; ++k) {
        Matrix mk = random_matrix(rng, m, m);
        mk *= std::sqrt(corr_budget * cw[k] / cwsum) / norm_spectral(mk);
        spec.M.push_back(mk);
    }
    for (std::size_t l = 0; l < o.mu; ++l) {
        Matrix nl = random_matrix(rng, m, m);
        nl *= n_norm / norm_spectral(nl);
        spec.N.push_back(nl);
    }
    spec.W0 = random_spd(rng, m);
    return spec;
}

/// Diagonal spec with random margins; scale controls how often the margin sums exceed one.
inline DccSpec random_diagonal_spec(std::mt19937_64& rng, std::size_t m, Orders o, double scale) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DccSpec spec;
    spec.m = m;
    const auto dim = static_cast<Eigen::Index>(m);
    spec.V0 = Vector::Constant(dim, 0.3);
    auto diag = [&](double s) {
        Vector d(dim);
        for (Eigen::Index i = 0; i < dim; ++i) d(i) = s * u(rng);
        return Matrix(d.asDiagonal());
    };
    const double vs = scale / static_cast<double>(o.r + o.s);
    for (std::size_t i = 0; i < o.r; ++i) spec.A.push_back(diag(vs));
    for (std::size_t j = 0; j < o.s; ++j) spec.B.push_back(diag(vs));
    const double ms = std::sqrt(scale / static_cast<double>(o.nu));
    for (std::size_t k = 0; k < o.nu; ++k) {
        Matrix d = diag(ms);
        // Random signs on the M diagonal make the lift entries mixed in sign.
        for (Eigen::Index i = 0; i < dim; ++i)
            if (u(rng) < 0.5) d(i, i) = -d(i, i);
        spec.M.push_back(d);
    }
    for (std::size_t l = 0; l < o.mu; ++l) spec.N.push_back(diag(0.5));
    spec.W0 = random_spd(rng, m);
    return spec;
}

}  // namespace dcc::testing
