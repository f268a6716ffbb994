#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mirrorshift/dynamics.hpp"
#include "mirrorshift/errors.hpp"
#include "mirrorshift/massshift.hpp"
#include "mirrorshift/trajectory.hpp"

using namespace mirrorshift;

namespace {

double true_eta(double tau) { return 0.3 * std::sin(0.7 * tau); }
double true_eta_dot(double tau) { return 0.21 * std::cos(0.7 * tau); }

std::shared_ptr<HistoryTrajectory> sin_history(int nodes, double dtau) {
    auto past = std::make_shared<Uniform>(0.0);
    auto h = std::make_shared<HistoryTrajectory>(past, 0.0, dtau);
    for (int i = 0; i < nodes; ++i) {
        double t = dtau * i;
        h->append(true_eta(t), true_eta_dot(t));
    }
    return h;
}

/// Composite Simpson integral of the forward null velocity; independent of
/// the stored node positions and their Gauss-Legendre advance.
double simpson_dzplus(const Trajectory& t, double lo, double hi, int n) {
    double h = (hi - lo) / n;
    double acc = t.state(lo).d1plus + t.state(hi).d1plus;
    for (int i = 1; i < n; ++i) acc += t.state(lo + i * h).d1plus * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

DynamicsConfig kick_config(double beta_f, double dtau) {
    DynamicsConfig cfg;
    cfg.bare_mass = 1.0;
    cfg.coupling = Coupling{1.0};
    cfg.past = std::make_shared<VelocityStep>(0.0, beta_f, 2.0);
    cfg.tau_start = 2.0;
    cfg.dtau = dtau;
    return cfg;
}

} // namespace

TEST_CASE("history trajectory validates its construction") {
    auto past = std::make_shared<Uniform>(0.0);
    CHECK_THROWS_AS(HistoryTrajectory(nullptr, 0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(
        HistoryTrajectory(past, std::numeric_limits<double>::infinity(), 0.1), ConfigError);
    CHECK_THROWS_AS(HistoryTrajectory(past, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(HistoryTrajectory(past, 0.0, -0.1), ConfigError);

    HistoryTrajectory empty(past, 0.0, 0.1);
    CHECK_THROWS_AS(empty.replace_last(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(empty.pop(), DomainError);
}

TEST_CASE("history nodes interpolate the rapidity profile") {
    double dtau = 0.1;
    auto h = sin_history(11, dtau);
    CHECK(h->node_count() == 11);
    CHECK(h->end_tau() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h->describe().find("dynamics_history") != std::string::npos);

    std::vector<double> bks = h->breakpoints();
    REQUIRE(bks.size() == 1);
    CHECK(bks[0] == 0.0);
    REQUIRE(h->uniform_before().has_value());
    CHECK(*h->uniform_before() == 0.0);

    // Node values are reproduced exactly, mid-cell ones to interpolant order.
    for (int i : {0, 4, 10}) {
        double t = dtau * i;
        CHECK(h->state(t).d1plus ==
              doctest::Approx(std::exp(true_eta(t))).epsilon(1e-15));
    }
    for (double t : {0.05, 0.47, 0.93}) {
        CAPTURE(t);
        TrajectoryState s = h->state(t);
        CHECK(s.d1plus == doctest::Approx(std::exp(true_eta(t))).epsilon(1e-7));
        CHECK(s.alpha == doctest::Approx(true_eta_dot(t)).epsilon(1e-4).scale(1.0));
        CHECK(s.d1plus * s.d1minus == doctest::Approx(1.0).epsilon(1e-15));
    }

    // Before the first node the prescribed past answers.
    CHECK(h->state(-2.0).d1plus == 1.0);
    // Beyond the last node the history refuses to extrapolate.
    CHECK_THROWS_AS(h->state(1.2), DomainError);

    // A lone node answers with its linear jet at the anchor point.
    HistoryTrajectory single(std::make_shared<Uniform>(0.0), 0.0, 0.1);
    single.append(0.05, 0.4);
    TrajectoryState s0 = single.state(0.0);
    CHECK(s0.d1plus == doctest::Approx(std::exp(0.05)).epsilon(1e-15));
    CHECK(s0.alpha == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("history null separations integrate the interpolant") {
    auto h = sin_history(11, 0.1);

    NullSeparation mid = h->null_separation(0.95, 0.15);
    double ref = simpson_dzplus(*h, 0.15, 0.95, 4000);
    CHECK(mid.dzplus == doctest::Approx(ref).epsilon(1e-10));

    // Straddling the junction combines the uniform past with the nodes.
    NullSeparation straddle = h->null_separation(0.85, -0.5);
    double ref2 = 0.5 + simpson_dzplus(*h, 0.0, 0.85, 4000);
    CHECK(straddle.dzplus == doctest::Approx(ref2).epsilon(1e-10));

    NullSeparation swapped = h->null_separation(-0.5, 0.85);
    CHECK(swapped.dzplus == -straddle.dzplus);
    CHECK(swapped.dzminus == -straddle.dzminus);
}

TEST_CASE("replacing the last node rewrites only the final cell") {
    auto h = sin_history(11, 0.1);
    double before_first = h->state(0.05).d1plus;
    double before_last = h->state(0.97).d1plus;

    h->replace_last(true_eta(1.0) + 0.01, true_eta_dot(1.0));
    CHECK(h->state(0.05).d1plus == before_first);
    CHECK(h->state(0.97).d1plus != before_last);

    h->pop();
    CHECK(h->node_count() == 10);
    CHECK(h->end_tau() == doctest::Approx(0.9).epsilon(1e-14));
    CHECK_THROWS_AS(h->state(0.97), DomainError);
}

TEST_CASE("dynamics configuration is validated up front") {
    DynamicsConfig cfg = kick_config(0.2, 0.05);
    CHECK_NOTHROW(cfg.validate());

    DynamicsConfig bad = cfg;
    bad.bare_mass = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.past.reset();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.dtau = 0.2; // exceeds 0.1/a
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.dtau = -0.01;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.coupling.a = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CHECK_THROWS_AS(evolve(cfg, cfg.tau_start), ConfigError);

    auto h = sin_history(3, 0.05);
    CHECK_THROWS_AS(derive_rates(*h, 0.1, -0.5, Coupling{1.0}, {}), DomainError);
    CHECK_THROWS_AS(derive_rates(*h, 0.1, 0.0, Coupling{1.0}, {}), DomainError);
}

TEST_CASE("uniform motion is a fixed point of the evolution") {
    DynamicsConfig cfg;
    cfg.bare_mass = 1.0;
    cfg.coupling = Coupling{1.0};
    cfg.past = std::make_shared<Uniform>(0.3);
    cfg.tau_start = 0.0;
    cfg.dtau = 0.1;

    DynamicsResult res = evolve(cfg, 5.0);
    CHECK(res.halt == HaltReason::Completed);
    REQUIRE(res.samples.size() == 51);

    double eta0 = std::atanh(0.3);
    for (const DynamicsSample& s : res.samples) {
        CHECK(std::abs(s.eta - eta0) < 1e-10);
        CHECK(std::abs(s.m_total - 1.0) < 1e-10);
        CHECK(std::abs(s.alpha) < 1e-9);
        CHECK(std::abs(s.mu) < 1e-10);
        CHECK(s.converged);
    }
}

TEST_CASE("kick evolution conserves energy and tracks the shift") {
    DynamicsConfig cfg = kick_config(0.2, 0.1);
    DynamicsResult res = evolve(cfg, 3.0);
    CHECK(res.halt == HaltReason::Completed);
    REQUIRE(res.samples.size() == 11);
    REQUIRE(res.trajectory);

    const DynamicsSample& first = res.samples.front();
    CHECK(first.tau == 2.0);
    TrajectoryCache past_cache(*cfg.past);
    double mu_start = mu_total(past_cache, 2.0, cfg.coupling).value;
    CHECK(first.m_total == doctest::Approx(1.0 + mu_start).epsilon(1e-12));

    for (const DynamicsSample& s : res.samples) {
        CAPTURE(s.tau);
        CHECK(s.converged);
        CHECK(s.err >= 0.0);
        CHECK(s.mu == s.m_total - cfg.bare_mass);
        CHECK(s.m_dot == -(s.flux_plus + s.flux_minus));
        CHECK(s.mu > 0.0);
    }

    // Mass loss balances the radiated flux along the run.
    double flux_int = 0.0;
    for (std::size_t i = 1; i < res.samples.size(); ++i) {
        const DynamicsSample& a = res.samples[i - 1];
        const DynamicsSample& b = res.samples[i];
        flux_int += 0.5 * (b.tau - a.tau) *
                    (a.flux_plus + a.flux_minus + b.flux_plus + b.flux_minus);
    }
    double dm = res.samples.back().m_total - first.m_total;
    CHECK(std::abs(dm + flux_int) < 5e-7);

    // The evolved worldline reproduces the tracked shift when fed back into
    // the direct functional.
    TrajectoryCache cache(*res.trajectory);
    double mu_direct = mu_total(cache, 3.0, cfg.coupling).value;
    CHECK(std::abs(res.samples.back().mu - mu_direct) < 1e-6);

    // Recorded null positions belong to the returned trajectory.
    const DynamicsSample& mid = res.samples[5];
    WorldlinePoint z = res.trajectory->state(mid.tau).z;
    CHECK(z.zplus == doctest::Approx(mid.z.zplus).epsilon(1e-13));
    CHECK(z.zminus == doctest::Approx(mid.z.zminus).epsilon(1e-13));
}

TEST_CASE("rapidity reversal mirrors the evolution exactly") {
    DynamicsResult fwd = evolve(kick_config(0.2, 0.1), 2.6);
    DynamicsResult rev = evolve(kick_config(-0.2, 0.1), 2.6);
    REQUIRE(fwd.samples.size() == rev.samples.size());
    for (std::size_t i = 0; i < fwd.samples.size(); ++i) {
        const DynamicsSample& f = fwd.samples[i];
        const DynamicsSample& r = rev.samples[i];
        CHECK(r.eta == -f.eta);
        CHECK(r.m_total == f.m_total);
        CHECK(r.flux_plus == f.flux_minus);
        CHECK(r.flux_minus == f.flux_plus);
    }
}

TEST_CASE("halving the substep shows second order convergence") {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (double dtau : {0.1, 0.05, 0.025}) {
        DynamicsResult res = evolve(kick_config(0.2, dtau), 3.0);
        REQUIRE(res.halt == HaltReason::Completed);
        double eta = res.samples.back().eta;
        double m = res.samples.back().m_total;
        if (dtau == 0.1) { e1 = eta; m1 = m; }
        if (dtau == 0.05) { e2 = eta; m2 = m; }
        if (dtau == 0.025) { e3 = eta; m3 = m; }
    }
    double eta_ratio = std::abs(e1 - e2) / std::abs(e2 - e3);
    double m_ratio = std::abs(m1 - m2) / std::abs(m2 - m3);
    CAPTURE(eta_ratio);
    CAPTURE(m_ratio);
    CHECK(eta_ratio > 2.8);
    CHECK(eta_ratio < 5.5);
    CHECK(m_ratio > 2.8);
    CHECK(m_ratio < 5.5);
}
