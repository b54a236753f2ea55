#pragma once

// Small dense linear algebra for symmetric systems: half-vectorization,
// Kronecker products, norms, spectra and the SPD square root.
//
// Index convention: the public phi()/phi_inv() pair speaks 1-based indices,
// everything else (SymIndexMap, Eigen accessors) is 0-based.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcc/errors.hpp"

namespace dcc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative symmetry tolerance used by vech() and SpdMatrix.
inline constexpr double kSymTol = 1e-10;
/// Relative tolerance for S*S == M after sqrt_spd().
inline constexpr double kSqrtTol = 1e-9;

/// m* = m(m+1)/2
constexpr std::size_t half_dim(std::size_t m) { return m * (m + 1) / 2; }

/// Column-wise enumeration of the lower triangle of an m x m matrix.
/// Position k (0-based) <-> pair (i, j) with i >= j (0-based).
class SymIndexMap {
public:
    explicit SymIndexMap(std::size_t m);

    std::size_t dim() const { return m_; }
    std::size_t half() const { return forward_.size(); }

    /// (row, col) of vech position k, row >= col.
    std::pair<std::size_t, std::size_t> pair(std::size_t k) const;
    /// vech position of (i, j); order of i and j does not matter.
    std::size_t position(std::size_t i, std::size_t j) const;

private:
    std::size_t m_;
    std::vector<std::pair<std::size_t, std::size_t>> forward_;
    std::vector<std::size_t> backward_;  // row-major m*m, symmetric
};

/// 1-based index map: k in 1..m(m+1)/2 -> (i, j) with i >= j.
std::pair<std::size_t, std::size_t> phi(std::size_t k, std::size_t m);
/// Inverse of phi, 1-based. Requires 1 <= j <= i <= m.
std::size_t phi_inv(std::size_t i, std::size_t j, std::size_t m);

bool is_symmetric(const Matrix& a, double rel_tol = kSymTol);
bool all_finite(const Matrix& a);

Vector vech(const Matrix& a);
Matrix unvech(const Vector& v);

Vector vecd(const Matrix& a);
Matrix diag_embed(const Vector& v);

Matrix kron(const Matrix& a, const Matrix& b);
/// a (x) a (x) ... (x) a, p >= 1 factors.
Matrix kron_power(const Matrix& a, int p);
Vector kron_power(const Vector& x, int p);

double norm_max(const Matrix& a);
/// Largest singular value. For a vector this is its Euclidean norm.
double norm_spectral(const Matrix& a);
/// Max absolute row sum.
double norm_induced_inf(const Matrix& a);

/// Largest eigenvalue modulus through a dense nonsymmetric eigensolver.
double spectral_radius(const Matrix& a);

struct PowerIterationResult {
    double radius = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Power iteration on a nonnegative matrix (Perron root). Used as an
/// independent route to spectral_radius() for companion matrices.
PowerIterationResult spectral_radius_power(const Matrix& a, double tol = 1e-12,
                                           int max_iter = 100000);

/// Symmetric matrix with strictly positive spectrum, checked on construction.
class SpdMatrix {
public:
    explicit SpdMatrix(Matrix a);

    const Matrix& matrix() const { return a_; }
    std::size_t dim() const { return static_cast<std::size_t>(a_.rows()); }
    /// Smallest eigenvalue, cached from the construction check.
    double lambda_min() const { return lambda_min_; }

private:
    Matrix a_;
    double lambda_min_;
};

double lambda_min_spd(const SpdMatrix& a);

/// Unique SPD square root through the symmetric eigendecomposition.
SpdMatrix sqrt_spd(const SpdMatrix& a);

/// Square root of a symmetric PSD matrix; eigenvalues in [-tol*||a||, 0] are
/// clamped to zero, anything more negative is a DomainError.
Matrix sqrt_psd(const Matrix& a, double rel_tol = 1e-12);

/// The m* x m* matrix L with vech(M Q M') = L vech(Q) for every symmetric Q.
Matrix lift_congruence(const Matrix& m, const SymIndexMap& idx);
Matrix lift_congruence(const Matrix& m);

}  // namespace dcc
