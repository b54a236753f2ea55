#pragma once

// DCC-GARCH parameterization:
//   Vecd(D_t) = V0 + sum_i A_i Vecd(D_{t-i}) + sum_j B_j (z_{t-j} .^ 2)
//   Q_t       = W0 + sum_k M_k Q_{t-k} M_k' + sum_l N_l eps_{t-l} eps_{t-l}' N_l'
//   R_t       = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}

#include <string>
#include <vector>

#include "dcc/matrix_kit.hpp"

namespace dcc {

struct DccSpec {
    std::size_t m = 0;
    Vector V0;
    std::vector<Matrix> A;  // r volatility-on-volatility matrices, >= 0
    std::vector<Matrix> B;  // s volatility-on-squared-return matrices, >= 0
    Matrix W0;              // SPD correlation intercept
    std::vector<Matrix> M;  // nu autoregressive loadings on Q
    std::vector<Matrix> N;  // mu innovation loadings on Q

    std::size_t r() const { return A.size(); }
    std::size_t s() const { return B.size(); }
    std::size_t nu() const { return M.size(); }
    std::size_t mu() const { return N.size(); }
};

struct ValidationIssue {
    std::string field;    // e.g. "A[0]", "W0"
    std::string message;  // includes the offending entry when there is one
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

/// Lists every violated admissibility condition. Never throws on finite or
/// non-finite input.
ValidationReport validate(const DccSpec& spec);

/// Throws DomainError carrying the report text when validate() fails.
void require_valid(const DccSpec& spec);

enum class StructureKind { General, PartiallyScalarM, Diagonal, Scalar };

std::string to_string(StructureKind kind);

struct ModelStructure {
    StructureKind kind = StructureKind::General;
    bool all_diagonal = false;  // every A, B, M, N diagonal
    bool m_scalar = false;      // every M_k = m_k I
    // Coefficients, filled when the corresponding family is scalar.
    std::vector<double> a, b, m_coefs, n_coefs;
};

/// Most specific structure: Scalar > Diagonal > PartiallyScalarM > General.
ModelStructure detect_structure(const DccSpec& spec);

/// Scalar DCC: every parameter matrix is coefficient * I_m, V0 = v0 * e.
DccSpec build_scalar(std::size_t m, const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& m_coefs, const std::vector<double>& n_coefs,
                     double v0, const Matrix& W0);

/// The bivariate scalar model used throughout the simulation study:
/// v0 = 1/4, a = 0.8, b = 0.1, W0 = I/2 + ee'/2, M = sqrt(m_sq) I, N = sqrt(n_sq) I.
DccSpec reference_bivariate_spec(double m_sq, double n_sq = 3.0);

/// True when a is c*I for some c (exact comparison); c is returned through coef.
bool is_scalar_identity(const Matrix& a, double* coef = nullptr);
bool is_diagonal(const Matrix& a);

}  // namespace dcc
