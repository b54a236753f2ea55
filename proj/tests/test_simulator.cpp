#include "doctest.h"

#include <cmath>

#include "dcc/simulator.hpp"
#include "support.hpp"

using namespace dcc;

namespace {

Matrix reference_w0() { return (Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished(); }

DccSpec ccc_spec(double a, double b) {
    DccSpec spec = build_scalar(2, {a}, {b}, {0.0}, {0.0}, 0.25, reference_w0());
    spec.V0 << 0.25, 0.6;
    return spec;
}

InnovationSpec gaussian(std::uint64_t seed) {
    InnovationSpec g;
    g.seed = seed;
    return g;
}

Matrix q_of(const StepRecord& r) { return unvech(r.vech_q); }
Matrix r_of(const StepRecord& r) { return unvech(r.vech_r); }

void check_same(const TrajectorySummary& a, const TrajectorySummary& b) {
    CHECK(a.steps_completed == b.steps_completed);
    CHECK(a.first_explosion_time == b.first_explosion_time);
    CHECK(a.max_q_norm == b.max_q_norm);
    CHECK(a.q_norm_final == b.q_norm_final);
    CHECK(a.q_norm_tenth == b.q_norm_tenth);
    CHECK(a.terminal_r_offdiag == b.terminal_r_offdiag);
    CHECK(a.z_moments == b.z_moments);
}

}  // namespace

TEST_CASE("config validation") {
    SimConfig c = SimConfig::reference(2, 100);
    CHECK(c.Q0 == Matrix::Identity(2, 2));
    CHECK(c.h0 == Vector::Constant(2, 0.5));
    CHECK_NOTHROW(c.validate(2));
    CHECK_THROWS_AS(c.validate(3), DomainError);
    c.burn_in = 100;
    CHECK_THROWS_AS(c.validate(2), DomainError);
    c = SimConfig::reference(2, 100);
    c.stride = 0;
    CHECK_THROWS_AS(c.validate(2), DomainError);
    c = SimConfig::reference(2, 100);
    c.explode_threshold = 0.0;
    CHECK_THROWS_AS(c.validate(2), DomainError);
    c = SimConfig::reference(2, 100);
    c.Q0 = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(c.validate(2), DomainError);
}

TEST_CASE("constant correlation regime") {
    const DccSpec spec = ccc_spec(0.5, 0.3);
    const Trajectory tr = simulate(spec, SimConfig::reference(2, 200), gaussian(1));
    const Matrix r_w0 = (Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished();
    for (const auto& rec : tr.records) {
        CHECK((q_of(rec) - reference_w0()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((r_of(rec) - r_w0).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("zero volatility dynamics pin h to V0") {
    DccSpec spec = reference_bivariate_spec(0.9);
    spec.A[0].setZero();
    spec.B[0].setZero();
    const Trajectory tr = simulate(spec, SimConfig::reference(2, 200), gaussian(2));
    for (const auto& rec : tr.records) CHECK(rec.h == spec.V0);
}

TEST_CASE("one step from the reference start") {
    const DccSpec spec = reference_bivariate_spec(0.999);
    const SimConfig cfg = SimConfig::reference(2, 10);
    InnovationSampler sampler(gaussian(3));
    SimState st = initial_state(spec, cfg, sampler);
    REQUIRE(st.eps.size() == 1);
    const Vector eps0 = st.eps.front();
    const Vector z0sq = st.sq_returns.front();
    CHECK((z0sq - (0.5 * eps0.cwiseAbs2())).cwiseAbs().maxCoeff() < 1e-15);

    const Vector eta = (Vector(2) << 0.7, -1.3).finished();
    const StepRecord rec = step(spec, st, eta);
    const Matrix q1 = reference_w0() + 0.999 * Matrix::Identity(2, 2) + 3.0 * eps0 * eps0.transpose();
    CHECK((q_of(rec) - q1).cwiseAbs().maxCoeff() < 1e-13);
    const Vector h1 = (Vector(2) << 0.25 + 0.8 * 0.5 + 0.1 * z0sq(0), 0.25 + 0.8 * 0.5 + 0.1 * z0sq(1)).finished();
    CHECK((rec.h - h1).cwiseAbs().maxCoeff() < 1e-15);

    // R1 by hand, then eps1 = R1^{1/2} eta and z1 = sqrt(h1) eps1.
    const double r12 = q1(0, 1) / std::sqrt(q1(0, 0) * q1(1, 1));
    CHECK(r_of(rec)(0, 1) == doctest::Approx(r12).epsilon(1e-14));
    CHECK(r_of(rec)(0, 0) == 1.0);
    const Matrix r1 = (Matrix(2, 2) << 1.0, r12, r12, 1.0).finished();
    const Matrix root = sqrt_spd(SpdMatrix(r1)).matrix();
    CHECK((rec.eps - root * eta).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((rec.z - h1.cwiseSqrt().cwiseProduct(rec.eps)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(st.eps.front() == rec.eps);
    CHECK(st.q.front() == q_of(rec));
}

TEST_CASE("simulation is deterministic and stream dependent") {
    const DccSpec spec = reference_bivariate_spec(0.999);
    const SimConfig cfg = SimConfig::reference(2, 500);
    const Trajectory a = simulate(spec, cfg, gaussian(5), 0);
    const Trajectory b = simulate(spec, cfg, gaussian(5), 0);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].z == b.records[i].z);
        CHECK(a.records[i].vech_q == b.records[i].vech_q);
    }
    check_same(a.summary, b.summary);
    check_same(a.summary, simulate_summary(spec, cfg, gaussian(5), 0));
    CHECK(simulate(spec, cfg, gaussian(5), 1).summary.max_q_norm != a.summary.max_q_norm);
}

TEST_CASE("burn-in and stride control the recorded window") {
    const DccSpec spec = reference_bivariate_spec(0.9);
    SimConfig cfg = SimConfig::reference(2, 1000);
    cfg.burn_in = 100;
    cfg.stride = 10;
    const Trajectory tr = simulate(spec, cfg, gaussian(6));
    REQUIRE(tr.records.size() == 90);
    CHECK(tr.records.front().t == 101);
    CHECK(tr.records[1].t == 111);
    CHECK(tr.records.back().t == 991);
    CHECK(tr.summary.steps_completed == 1000);
}

TEST_CASE("trajectory invariants hold on random specs") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const dcc::testing::Orders o{1 + static_cast<std::size_t>(rep % 2), 1, 1, 1 + static_cast<std::size_t>(rep % 2)};
        const DccSpec spec = dcc::testing::random_spec(rng, 2 + static_cast<std::size_t>(rep % 3), o, 0.9, 0.95, 0.5);
        const TrajectorySummary s = simulate_summary(spec, SimConfig::reference(spec.m, 2000), gaussian(20 + static_cast<std::uint64_t>(rep)));
        const auto& inv = s.invariants;
        CHECK(inv.max_r_diag_error == 0.0);
        CHECK(inv.max_abs_r_offdiag <= 1.0 + 1e-12);
        CHECK(inv.min_lambda_r >= -1e-12);
        CHECK(inv.min_lambda_q >= lambda_min_spd(SpdMatrix(spec.W0)) - 1e-12);
        CHECK(inv.min_h_margin >= 0.0);
    }
}

TEST_CASE("explosive correlation dynamics stop at the threshold") {
    const DccSpec spec = reference_bivariate_spec(1.5);
    SimConfig cfg = SimConfig::reference(2, 1000);
    const Trajectory tr = simulate(spec, cfg, gaussian(9));
    REQUIRE(tr.summary.exploded());
    const std::size_t t_star = *tr.summary.first_explosion_time;
    // ||Q_t|| grows at least like 1.5^t, so it passes 1e12 within 70 steps.
    CHECK(t_star < 70);
    CHECK(tr.records.back().t == t_star);
    CHECK(tr.records.back().q_norm_max > cfg.explode_threshold);
    CHECK(tr.summary.steps_completed == t_star);
    CHECK(tr.records.size() == t_star);
    CHECK_THROWS_AS(moment_diagnostics(tr, {2.0}), DomainError);
    CHECK_FALSE(tr.summary.moment_stable());
}

TEST_CASE("moment diagnostics in the constant correlation regime") {
    // With A = B = 0 the returns are i.i.d. N(0, H), H = diag(sqrt V0) R diag(sqrt V0).
    const DccSpec spec = ccc_spec(0.0, 0.0);
    SimConfig cfg = SimConfig::reference(2, 100000);
    const Trajectory tr = simulate(spec, cfg, gaussian(10));
    const auto mom = moment_diagnostics(tr, {2.0, 4.0});
    int checked = 0;
    for (const auto& e : mom) {
        if (e.series == "z" && e.order == 2.0) {
            CHECK(std::abs(e.mean - spec.V0(static_cast<Eigen::Index>(e.component))) <= 3.0 * e.std_error);
            ++checked;
        }
        if (e.series == "h") CHECK(e.std_error == 0.0);
        if (e.series == "z" && e.order == 4.0) {
            const double v = spec.V0(static_cast<Eigen::Index>(e.component));
            CHECK(std::abs(e.mean - 3.0 * v * v) <= 3.0 * e.std_error);
        }
    }
    CHECK(checked == 2);

    // Empirical covariance of z against H.
    const Matrix h = (Matrix(2, 2) << 0.25, 0.5 * std::sqrt(0.25 * 0.6), 0.5 * std::sqrt(0.25 * 0.6), 0.6).finished();
    Matrix cov = Matrix::Zero(2, 2);
    for (const auto& rec : tr.records) cov += rec.z * rec.z.transpose();
    const double n = static_cast<double>(tr.records.size());
    cov /= n;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double se = std::sqrt((h(i, i) * h(j, j) + h(i, j) * h(i, j)) / n);
            CHECK(std::abs(cov(i, j) - h(i, j)) <= 3.0 * se);
        }
}

TEST_CASE("conditional correlation law with frozen dynamics") {
    // M = N = 0 freezes R_t at the correlation of W0; then E[eps eps'] = R.
    const DccSpec spec = ccc_spec(0.0, 0.0);
    InnovationSampler sampler(gaussian(11));
    SimState st = initial_state(spec, SimConfig::reference(2, 10), sampler);
    const double rho = 0.5;
    const int n = 1000000;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (int i = 0; i < n; ++i) {
        const StepRecord rec = step(spec, st, sampler.draw(2));
        s11 += rec.eps(0) * rec.eps(0);
        s12 += rec.eps(0) * rec.eps(1);
        s22 += rec.eps(1) * rec.eps(1);
    }
    CHECK(std::abs(s11 / n - 1.0) <= 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s22 / n - 1.0) <= 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s12 / n - rho) <= 3.0 * std::sqrt((1.0 + rho * rho) / n));
}

TEST_CASE("ensembles") {
    const DccSpec spec = reference_bivariate_spec(0.999);
    const SimConfig cfg = SimConfig::reference(2, 2000);
    const InnovationSpec g = gaussian(12);

    SUBCASE("one run equals simulate") {
        const EnsembleResult e = ensemble(spec, cfg, g, 1, 1);
        REQUIRE(e.runs.size() == 1);
        check_same(e.runs[0], simulate(spec, cfg, g, 0).summary);
    }
    SUBCASE("thread count does not change results") {
        const EnsembleResult s = ensemble_serial(spec, cfg, g, 8);
        for (int threads : {1, 3, 8}) {
            const EnsembleResult p = ensemble(spec, cfg, g, 8, threads);
            REQUIRE(p.runs.size() == 8);
            for (std::size_t i = 0; i < 8; ++i) check_same(p.runs[i], s.runs[i]);
            CHECK(p.max_q_quantiles == s.max_q_quantiles);
            CHECK(p.terminal_r12_std == s.terminal_r12_std);
        }
        CHECK(s.explosion_fraction == 0.0);
        CHECK(s.terminal_r12_std > 0.0);
    }
    SUBCASE("an invalid law is rejected before any run starts") {
        InnovationSpec bad = g;
        bad.family = InnovationFamily::StudentT;
        bad.dof = 1.0;
        bad.standardization = Standardization::UnitVariance;
        CHECK_THROWS_AS(ensemble(spec, cfg, bad, 3, 2), DomainError);
    }
}

TEST_CASE("aggregation and quantiles") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({5.0}, 0.9) == 5.0);
    CHECK(quantile({1.0, 9.0}, 1.0) == 9.0);

    std::vector<TrajectorySummary> runs(4);
    for (std::size_t i = 0; i < 4; ++i) {
        runs[i].max_q_norm = static_cast<double>(i + 1);
        runs[i].q_norm_final = 10.0 * static_cast<double>(i + 1);
        runs[i].q_norm_tenth = 1.0;
        runs[i].terminal_r_offdiag = Vector::Constant(1, 0.1 * static_cast<double>(i));
        runs[i].second_moment_ratio = 1.0;
        runs[i].steps_completed = runs[i].horizon = 10;
    }
    runs[3].first_explosion_time = 5;
    const EnsembleResult e = aggregate(runs);
    std::vector<TrajectorySummary> with_failure = runs;
    with_failure[0].error = "boom";
    const EnsembleResult f = aggregate(with_failure);
    CHECK(f.failed_runs == 1);
    CHECK(f.unstable_runs == 2);
    CHECK(e.explosion_fraction == 0.25);
    CHECK(e.max_q_quantiles.front() == 1.0);
    CHECK(e.max_q_quantiles.back() == 4.0);
    CHECK(e.median_q_final == 25.0);
    // Sample std of {0, 0.1, 0.2} over non-exploded runs.
    CHECK(e.terminal_r12_std == doctest::Approx(0.1));
    CHECK(e.unstable_runs == 1);
}
