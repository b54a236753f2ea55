#include "dcc/matrix_kit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dcc {

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw DomainError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", expected square");
    }
}

}  // namespace

SymIndexMap::SymIndexMap(std::size_t m) : m_(m), backward_(m * m, 0) {
    if (m == 0) throw RangeError("SymIndexMap: dimension must be positive");
    forward_.reserve(half_dim(m));
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = j; i < m; ++i) {
            backward_[i * m + j] = forward_.size();
            backward_[j * m + i] = forward_.size();
            forward_.emplace_back(i, j);
        }
    }
}

std::pair<std::size_t, std::size_t> SymIndexMap::pair(std::size_t k) const {
    if (k >= forward_.size()) {
        throw RangeError("SymIndexMap: position " + std::to_string(k) + " out of range");
    }
    return forward_[k];
}

std::size_t SymIndexMap::position(std::size_t i, std::size_t j) const {
    if (i >= m_ || j >= m_) throw RangeError("SymIndexMap: index pair out of range");
    return backward_[i * m_ + j];
}

std::pair<std::size_t, std::size_t> phi(std::size_t k, std::size_t m) {
    if (m == 0 || k < 1 || k > half_dim(m)) {
        throw RangeError("phi: k=" + std::to_string(k) + " outside 1.." +
                         std::to_string(half_dim(m)));
    }
    // Column j (1-based) starts after m + (m-1) + ... + (m-j+2) entries.
    std::size_t offset = 0;
    std::size_t j = 1;
    while (k > offset + (m - j + 1)) {
        offset += m - j + 1;
        ++j;
    }
    return {k - offset + j - 1, j};
}

std::size_t phi_inv(std::size_t i, std::size_t j, std::size_t m) {
    if (j < 1 || j > i || i > m) throw RangeError("phi_inv: need 1 <= j <= i <= m");
    std::size_t offset = 0;
    for (std::size_t c = 1; c < j; ++c) offset += m - c + 1;
    return offset + (i - j + 1);
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = norm_max(a);
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector vech(const Matrix& a) {
    require_square(a, "vech");
    if (!is_symmetric(a)) throw DomainError("vech: matrix is not symmetric");
    const auto m = static_cast<std::size_t>(a.rows());
    Vector v(static_cast<Eigen::Index>(half_dim(m)));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = j; i < a.rows(); ++i) v(k++) = a(i, j);
    return v;
}

Matrix unvech(const Vector& v) {
    const auto n = static_cast<std::size_t>(v.size());
    std::size_t m = 0;
    while (half_dim(m) < n) ++m;
    if (m == 0 || half_dim(m) != n) {
        throw DomainError("unvech: length " + std::to_string(n) + " is not m(m+1)/2");
    }
    const auto dim = static_cast<Eigen::Index>(m);
    Matrix a(dim, dim);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = j; i < dim; ++i) {
            a(i, j) = v(k);
            a(j, i) = v(k);
            ++k;
        }
    }
    return a;
}

Vector vecd(const Matrix& a) {
    require_square(a, "vecd");
    return a.diagonal();
}

Matrix diag_embed(const Vector& v) { return v.asDiagonal(); }

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix kron_power(const Matrix& a, int p) {
    if (p < 1) throw RangeError("kron_power: p must be >= 1");
    Matrix out = a;
    for (int i = 1; i < p; ++i) out = kron(out, a);
    return out;
}

Vector kron_power(const Vector& x, int p) {
    if (p < 1) throw RangeError("kron_power: p must be >= 1");
    Matrix out = x;
    for (int i = 1; i < p; ++i) out = kron(out, Matrix(x));
    return out;
}

double norm_max(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double norm_spectral(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    if (a.cols() == 1 || a.rows() == 1) return a.norm();
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

double norm_induced_inf(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

double spectral_radius(const Matrix& a) {
    require_square(a, "spectral_radius");
    if (!a.allFinite()) throw NumericError("spectral_radius: non-finite entries");
    if (a.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw NumericError("spectral_radius: Hessenberg QR did not converge for " +
                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                           " matrix (limit " + std::to_string(40 * a.rows()) +
                           " iterations)");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PowerIterationResult spectral_radius_power(const Matrix& a, double tol, int max_iter) {
    require_square(a, "spectral_radius_power");
    if ((a.array() < 0.0).any()) throw DomainError("spectral_radius_power: negative entries");
    PowerIterationResult res;
    if (a.rows() == 0) {
        res.converged = true;
        return res;
    }
    // The unit shift keeps the Perron root dominant for periodic/reducible inputs.
    const Matrix shifted = a + Matrix::Identity(a.rows(), a.cols());
    // Collatz-Wielandt: min_i (Sx)_i / x_i <= rho(S) <= max_i (Sx)_i / x_i for x > 0.
    Vector x = Vector::Ones(a.rows());
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector y = shifted * x;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (!(x(i) > 0.0)) continue;
            const double ratio = y(i) / x(i);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        res.iterations = it;
        prev = 0.5 * (lo + hi);
        if (hi - lo <= tol * hi) {
            res.radius = prev - 1.0;
            res.converged = true;
            return res;
        }
        x = y / y.maxCoeff();
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) < 1e-300) x(i) = 0.0;
    }
    throw NumericError("spectral_radius_power: no convergence after " +
                       std::to_string(max_iter) + " iterations, last estimate " +
                       std::to_string(prev - 1.0));
}

SpdMatrix::SpdMatrix(Matrix a) : a_(std::move(a)), lambda_min_(0.0) {
    require_square(a_, "SpdMatrix");
    if (!a_.allFinite()) throw DomainError("SpdMatrix: non-finite entries");
    if (!is_symmetric(a_)) throw DomainError("SpdMatrix: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("SpdMatrix: eigensolver failed");
    lambda_min_ = es.eigenvalues()(0);
    if (!(lambda_min_ > 0.0)) {
        throw DomainError("SpdMatrix: smallest eigenvalue " + std::to_string(lambda_min_) +
                          " is not positive");
    }
}

double lambda_min_spd(const SpdMatrix& a) { return a.lambda_min(); }

SpdMatrix sqrt_spd(const SpdMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
    if (es.info() != Eigen::Success) throw NumericError("sqrt_spd: eigensolver failed");
    const Vector& ev = es.eigenvalues();
    if (!(ev(0) > 0.0)) throw DomainError("sqrt_spd: matrix is not positive definite");
    const Matrix& v = es.eigenvectors();
    Matrix root = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
    // Exact symmetry; the eigenvector product leaves ~1e-16 skew.
    root = 0.5 * (root + root.transpose());
    return SpdMatrix(std::move(root));
}

Matrix sqrt_psd(const Matrix& a, double rel_tol) {
    require_square(a, "sqrt_psd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NumericError("sqrt_psd: eigensolver failed");
    Vector ev = es.eigenvalues();
    const double floor = -rel_tol * std::max(std::abs(ev(ev.size() - 1)), 1.0);
    if (ev(0) < floor) {
        throw DomainError("sqrt_psd: eigenvalue " + std::to_string(ev(0)) +
                          " below PSD tolerance");
    }
    ev = ev.cwiseMax(0.0);
    const Matrix& v = es.eigenvectors();
    Matrix root = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
    return 0.5 * (root + root.transpose());
}

Matrix lift_congruence(const Matrix& m, const SymIndexMap& idx) {
    require_square(m, "lift_congruence");
    if (static_cast<std::size_t>(m.rows()) != idx.dim()) {
        throw DomainError("lift_congruence: matrix dimension does not match index map");
    }
    const auto n = static_cast<Eigen::Index>(idx.half());
    Matrix out(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        const auto [i, j] = idx.pair(static_cast<std::size_t>(u));
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        for (Eigen::Index v = 0; v < n; ++v) {
            const auto [p, q] = idx.pair(static_cast<std::size_t>(v));
            const auto pp = static_cast<Eigen::Index>(p), qq = static_cast<Eigen::Index>(q);
            double entry = m(ii, pp) * m(jj, qq);
            // Off-diagonal Q entries appear twice in M Q M'.
            if (p != q) entry += m(ii, qq) * m(jj, pp);
            out(u, v) = entry;
        }
    }
    return out;
}

Matrix lift_congruence(const Matrix& m) {
    require_square(m, "lift_congruence");
    return lift_congruence(m, SymIndexMap(static_cast<std::size_t>(m.rows())));
}

}  // namespace dcc
