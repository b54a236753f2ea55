#include "dcc/model.hpp"

#include <cmath>
#include <sstream>

#include <fmt/core.h>

namespace dcc {

namespace {

void check_shape(const Matrix& a, std::size_t m, const std::string& field,
                 ValidationReport& rep) {
    if (static_cast<std::size_t>(a.rows()) != m || static_cast<std::size_t>(a.cols()) != m) {
        rep.issues.push_back({field, fmt::format("expected {}x{}, got {}x{}", m, m, a.rows(),
                                                 a.cols())});
    }
}

bool check_finite(const Matrix& a, const std::string& field, ValidationReport& rep) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (!std::isfinite(a(i, j))) {
                rep.issues.push_back({field, fmt::format("entry ({},{}) is not finite", i, j)});
                return false;
            }
        }
    }
    return true;
}

void check_nonnegative(const std::vector<Matrix>& mats, const std::string& name, std::size_t m,
                       ValidationReport& rep) {
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const std::string field = fmt::format("{}[{}]", name, k);
        check_shape(mats[k], m, field, rep);
        if (!check_finite(mats[k], field, rep)) continue;
        for (Eigen::Index i = 0; i < mats[k].rows(); ++i)
            for (Eigen::Index j = 0; j < mats[k].cols(); ++j)
                if (mats[k](i, j) < 0.0)
                    rep.issues.push_back(
                        {field, fmt::format("entry ({},{}) = {} is negative", i, j,
                                            mats[k](i, j))});
    }
}

void check_unconstrained(const std::vector<Matrix>& mats, const std::string& name, std::size_t m,
                         ValidationReport& rep) {
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const std::string field = fmt::format("{}[{}]", name, k);
        check_shape(mats[k], m, field, rep);
        check_finite(mats[k], field, rep);
    }
}

}  // namespace

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& issue : issues) os << issue.field << ": " << issue.message << "\n";
    return os.str();
}

ValidationReport validate(const DccSpec& spec) {
    ValidationReport rep;
    const std::size_t m = spec.m;
    if (m == 0) {
        rep.issues.push_back({"m", "dimension must be positive"});
        return rep;
    }
    if (static_cast<std::size_t>(spec.V0.size()) != m) {
        rep.issues.push_back({"V0", fmt::format("expected length {}, got {}", m, spec.V0.size())});
    } else {
        for (Eigen::Index i = 0; i < spec.V0.size(); ++i)
            if (!(spec.V0(i) > 0.0) || !std::isfinite(spec.V0(i)))
                rep.issues.push_back(
                    {"V0", fmt::format("entry {} = {} is not strictly positive", i, spec.V0(i))});
    }
    if (spec.r() == 0) rep.issues.push_back({"A", "at least one matrix required (r >= 1)"});
    if (spec.s() == 0) rep.issues.push_back({"B", "at least one matrix required (s >= 1)"});
    if (spec.nu() == 0) rep.issues.push_back({"M", "at least one matrix required (nu >= 1)"});
    if (spec.mu() == 0) rep.issues.push_back({"N", "at least one matrix required (mu >= 1)"});
    check_nonnegative(spec.A, "A", m, rep);
    check_nonnegative(spec.B, "B", m, rep);
    check_unconstrained(spec.M, "M", m, rep);
    check_unconstrained(spec.N, "N", m, rep);

    const std::size_t before = rep.issues.size();
    check_shape(spec.W0, m, "W0", rep);
    if (rep.issues.size() == before && check_finite(spec.W0, "W0", rep)) {
        if (!is_symmetric(spec.W0)) {
            rep.issues.push_back({"W0", "not symmetric"});
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix> es(spec.W0, Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues()(0);
            const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
            if (!(lmin > 1e-12 * scale) || scale == 0.0) {
                rep.issues.push_back(
                    {"W0", fmt::format("not positive definite (smallest eigenvalue {})", lmin)});
            }
        }
    }
    return rep;
}

void require_valid(const DccSpec& spec) {
    const auto rep = validate(spec);
    if (!rep.ok()) throw DomainError("invalid DCC specification:\n" + rep.to_string());
}

std::string to_string(StructureKind kind) {
    switch (kind) {
        case StructureKind::General: return "general";
        case StructureKind::PartiallyScalarM: return "partially_scalar_m";
        case StructureKind::Diagonal: return "diagonal";
        case StructureKind::Scalar: return "scalar";
    }
    return "unknown";
}

bool is_diagonal(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && a(i, j) != 0.0) return false;
    return true;
}

bool is_scalar_identity(const Matrix& a, double* coef) {
    if (a.rows() != a.cols() || a.rows() == 0 || !is_diagonal(a)) return false;
    const double c = a(0, 0);
    for (Eigen::Index i = 1; i < a.rows(); ++i)
        if (a(i, i) != c) return false;
    if (coef) *coef = c;
    return true;
}

namespace {

bool family_scalar(const std::vector<Matrix>& mats, std::vector<double>& out) {
    std::vector<double> coefs;
    for (const auto& a : mats) {
        double c = 0.0;
        if (!is_scalar_identity(a, &c)) return false;
        coefs.push_back(c);
    }
    out = std::move(coefs);
    return true;
}

bool family_diagonal(const std::vector<Matrix>& mats) {
    for (const auto& a : mats)
        if (!is_diagonal(a)) return false;
    return true;
}

}  // namespace

ModelStructure detect_structure(const DccSpec& spec) {
    ModelStructure st;
    const bool a_sc = family_scalar(spec.A, st.a);
    const bool b_sc = family_scalar(spec.B, st.b);
    st.m_scalar = family_scalar(spec.M, st.m_coefs);
    const bool n_sc = family_scalar(spec.N, st.n_coefs);
    st.all_diagonal = family_diagonal(spec.A) && family_diagonal(spec.B) &&
                      family_diagonal(spec.M) && family_diagonal(spec.N);
    if (a_sc && b_sc && st.m_scalar && n_sc) {
        st.kind = StructureKind::Scalar;
    } else if (st.all_diagonal) {
        st.kind = StructureKind::Diagonal;
    } else if (st.m_scalar) {
        st.kind = StructureKind::PartiallyScalarM;
    }
    return st;
}

DccSpec build_scalar(std::size_t m, const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& m_coefs, const std::vector<double>& n_coefs,
                     double v0, const Matrix& W0) {
    for (double x : a)
        if (x < 0.0) throw DomainError("build_scalar: negative a coefficient");
    for (double x : b)
        if (x < 0.0) throw DomainError("build_scalar: negative b coefficient");
    DccSpec spec;
    spec.m = m;
    const auto dim = static_cast<Eigen::Index>(m);
    const Matrix eye = Matrix::Identity(dim, dim);
    spec.V0 = Vector::Constant(dim, v0);
    for (double x : a) spec.A.push_back(x * eye);
    for (double x : b) spec.B.push_back(x * eye);
    for (double x : m_coefs) spec.M.push_back(x * eye);
    for (double x : n_coefs) spec.N.push_back(x * eye);
    spec.W0 = W0;
    require_valid(spec);
    return spec;
}

DccSpec reference_bivariate_spec(double m_sq, double n_sq) {
    const Matrix e = Matrix::Ones(2, 1);
    const Matrix W0 = 0.5 * Matrix::Identity(2, 2) + 0.5 * e * e.transpose();
    return build_scalar(2, {0.8}, {0.1}, {std::sqrt(m_sq)}, {std::sqrt(n_sq)}, 0.25, W0);
}

}  // namespace dcc
