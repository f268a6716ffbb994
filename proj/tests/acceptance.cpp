// Acceptance gate for the delivered library: twelve end-to-end criteria
// covering null tests, closed forms, short-time and adiabatic laws,
// dual-route identities, scaling, and backreaction dynamics. Each criterion
// prints a single PASS or FAIL line with its measured figures and elapsed
// time; the process exits 0 only if every executed criterion passed.
//
//   acceptance            run all criteria
//   acceptance --only N   run criterion N alone

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mirrorshift/dynamics.hpp"
#include "mirrorshift/expr.hpp"
#include "mirrorshift/massshift.hpp"
#include "mirrorshift/rng.hpp"
#include "mirrorshift/trajectory.hpp"

namespace ms = mirrorshift;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel_diff(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

std::shared_ptr<ms::RapidityProfile> profile(const std::string& source) {
    return std::make_shared<ms::RapidityProfile>(ms::parse_profile(source));
}

struct Fit2 {
    double c = 0.0; // coefficient of -a tau ln(a tau)
    double d = 0.0; // coefficient of a tau
};

Fit2 fit_short_time(const std::vector<double>& taus, const std::vector<double>& mus, double a) {
    long double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        long double x = a * taus[i];
        long double f1 = -x * std::log(x);
        long double f2 = x;
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        b1 += f1 * mus[i];
        b2 += f2 * mus[i];
    }
    long double det = s11 * s22 - s12 * s12;
    return {static_cast<double>((b1 * s22 - b2 * s12) / det),
            static_cast<double>((s11 * b2 - s12 * b1) / det)};
}

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(xs.size());
    ym /= static_cast<double>(xs.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - xm) * (ys[i] - ym);
        den += (xs[i] - xm) * (xs[i] - xm);
    }
    return num / den;
}

// 1. Uniform worldlines produce no shift and no rate, at any velocity.
bool c01(std::string& d) {
    ms::SplitMix64 rng(42);
    ms::Coupling c{1.0};
    double max_mu = 0, max_md = 0;
    for (int i = 0; i < 20; ++i) {
        ms::Uniform traj(rng.uniform(-0.95, 0.95));
        ms::TrajectoryCache cache(traj);
        for (double tau : {0.0, 2.5, 5.0, 10.0}) {
            ms::IntegralResult mu = ms::mu_total(cache, tau, c);
            ms::IntegralResult md = ms::mu_dot(cache, tau, c);
            if (!mu.converged || !md.converged) {
                d = "quadrature did not converge";
                return false;
            }
            max_mu = std::max(max_mu, std::abs(mu.value));
            max_md = std::max(max_md, std::abs(md.value));
        }
    }
    d = fmt("max|mu|/a=%.1e max|mu_dot|/a^2=%.1e over 20 velocities", max_mu, max_md);
    return max_mu < 1e-9 && max_md < 1e-10;
}

// 2. The static offset from raw singular quadrature matches the closed form,
//    and the unsubtracted direct value does not depend on the frame.
bool c02(std::string& d) {
    double max_rel = 0;
    for (double a : {0.5, 1.0, 2.0, 5.0}) {
        ms::IntegralResult num = ms::mu0_numeric(a);
        if (!num.converged) {
            d = fmt("mu0 quadrature did not converge at a=%g", a);
            return false;
        }
        max_rel = std::max(max_rel, rel_diff(num.value, ms::mu0_closed_form(a)));
    }

    ms::Coupling c{1.0};
    double direct[2];
    double betas[2] = {0.0, 0.9};
    for (int i = 0; i < 2; ++i) {
        ms::Uniform traj(betas[i]);
        ms::TrajectoryCache cache(traj);
        direct[i] = ms::mu_total(cache, 0.0, c).value + ms::mu0_closed_form(c.a);
    }
    double beta_rel = rel_diff(direct[1], direct[0]);
    d = fmt("dual-route rel=%.1e, frame dependence rel=%.1e", max_rel, beta_rel);
    return max_rel < 1e-8 && beta_rel < 1e-6;
}

// 3. Eternal constant proper acceleration gives a vanishing rate.
bool c03(std::string& d) {
    ms::Coupling c{1.0};
    double max_md = 0;
    for (double alpha0 : {0.1, 0.3, 1.0}) {
        ms::Hyperbolic traj(alpha0);
        ms::TrajectoryCache cache(traj);
        for (double tau : {-1.0, 0.7, 2.5}) {
            ms::IntegralResult md = ms::mu_dot(cache, tau, c);
            if (!md.converged) {
                d = fmt("quadrature did not converge at alpha0=%g", alpha0);
                return false;
            }
            max_md = std::max(max_md, std::abs(md.value));
        }
    }
    d = fmt("max|mu_dot|/a^2=%.1e over three accelerations", max_md);
    return max_md < 1e-10;
}

// 4. Slow-motion laws: the computed rate against the two-term closed form and
//    the computed shift against alpha^2/(48 pi a), over one full oscillation
//    of a gentle sinusoidal rapidity.
bool c04(std::string& d) {
    const double eps = 0.01, omega = 0.05, a = 1.0;
    ms::Coupling c{a};
    auto traj = profile("eta = 0.01*sin(0.05*tau)");
    ms::TrajectoryCache cache(*traj);
    const double period = 2.0 * kPi / omega;

    std::vector<double> md_exact, md_law, mu_exact, mu_law;
    for (int j = 1; j <= 8; ++j) {
        double tau = period * static_cast<double>(j) / 8.0;
        double al = eps * omega * std::cos(omega * tau);
        double ad = -eps * omega * omega * std::sin(omega * tau);
        double add = -eps * omega * omega * omega * std::cos(omega * tau);
        ms::IntegralResult md = ms::mu_dot(cache, tau, c);
        ms::IntegralResult mu = ms::mu_total(cache, tau, c);
        if (!md.converged || !mu.converged) {
            d = "quadrature did not converge";
            return false;
        }
        md_exact.push_back(md.value);
        md_law.push_back(ms::mu_dot_asymptotic(al, ad, add, a));
        mu_exact.push_back(mu.value);
        mu_law.push_back(ms::mu_asymptotic(al, a));
    }

    auto max_dev = [](const std::vector<double>& got, const std::vector<double>& want) {
        double cap = 0;
        for (double w : want) cap = std::max(cap, std::abs(w));
        double dev = 0;
        for (std::size_t i = 0; i < got.size(); ++i)
            if (std::abs(want[i]) > 0.2 * cap) dev = std::max(dev, rel_diff(got[i], want[i]));
        return dev;
    };
    double md_dev = max_dev(md_exact, md_law);
    double mu_dev = max_dev(mu_exact, mu_law);
    // Diagnostic ratios at the quarter and half period, where one term of
    // each law dominates.
    double r_md = md_exact[1] / md_law[1];
    double r_mu = mu_exact[3] / mu_law[3];
    d = fmt("rate dev=%.3g (ratio %.4g at T/4), shift dev=%.3g (ratio %.4g at T/2)", md_dev,
            r_md, mu_dev, r_mu);
    return md_dev < 0.02 && mu_dev < 0.10;
}

// 5. Sharp velocity step: the short-time coefficient of -a tau ln(a tau),
//    its symmetry under swapping the two plateaus, and its vanishing when
//    the plateaus are equal.
bool c05(std::string& d) {
    const double a = 1.0;
    ms::Coupling c{a};
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;

    auto fit_for = [&](double bi, double bf, bool& ok) {
        ms::VelocityStep st(bi, bf, 0.0);
        ms::TrajectoryCache cache(st);
        std::vector<double> taus, mus;
        for (int i = 0; i < 10; ++i) {
            double tau = 1e-3 * std::pow(10.0, static_cast<double>(i) / 9.0);
            ms::IntegralResult mu = ms::mu_total(cache, tau, c, qs);
            ok = ok && mu.converged;
            taus.push_back(tau);
            mus.push_back(mu.value);
        }
        return fit_short_time(taus, mus, a);
    };

    bool ok = true;
    double c_up = fit_for(0.0, 0.5, ok).c;
    double c_down = fit_for(0.5, 0.0, ok).c;
    double c_equal = fit_for(0.3, 0.3, ok).c;
    if (!ok) {
        d = "quadrature did not converge";
        return false;
    }
    double dev = rel_diff(c_up, 0.0123115);
    double sym = std::abs(c_down - c_up) / std::abs(c_up);
    d = fmt("C=%.6g (dev %.3g), swap dev %.2g, equal-plateau C=%.1e", c_up, dev, sym, c_equal);
    return dev < 0.10 && sym < 0.01 && std::abs(c_equal) < 1e-6;
}

// 6. The two formulations of the rate agree on smooth motion across a grid
//    of amplitudes and frequencies.
bool c06(std::string& d) {
    ms::Coupling c{1.0};
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;
    const double tau = 2.6;
    double max_rel = 0;
    for (double amp : {0.01, 0.05, 0.2}) {
        for (double omega : {0.3, 0.8, 2.0}) {
            auto traj = profile(fmt("eta = %.17g*sin(%.17g*tau)", amp, omega));
            ms::TrajectoryCache cache(*traj);
            ms::IntegralResult weak = ms::mu_dot_weak(cache, tau, c, qs);
            ms::IntegralResult strong = ms::mu_dot_strong(cache, tau, c, qs);
            if (!weak.converged || !strong.converged) {
                d = fmt("quadrature did not converge at amp=%g omega=%g", amp, omega);
                return false;
            }
            max_rel = std::max(max_rel, rel_diff(weak.value, strong.value));
        }
    }
    d = fmt("max rel difference %.1e over 3x3 grid", max_rel);
    return max_rel < 1e-6;
}

// 7. The accumulated shift differentiates back to the direct rate.
bool c07(std::string& d) {
    ms::Coupling c{1.0};
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;
    qs.abs_tol = 1e-14;
    auto traj = profile("eta = 0.1*sin(0.6*tau)");
    ms::TrajectoryCache cache(*traj);
    const double h = 0.02;
    double max_rel = 0;
    for (double tau : {0.7, 1.3, 1.9, 3.3, 3.9, 4.5, 6.0, 6.6, 8.6, 9.2}) {
        ms::IntegralResult hi = ms::mu_total(cache, tau + h, c, qs);
        ms::IntegralResult lo = ms::mu_total(cache, tau - h, c, qs);
        ms::IntegralResult md = ms::mu_dot_strong(cache, tau, c, qs);
        if (!hi.converged || !lo.converged || !md.converged) {
            d = fmt("quadrature did not converge at tau=%g", tau);
            return false;
        }
        double fd = (hi.value - lo.value) / (2.0 * h);
        max_rel = std::max(max_rel, rel_diff(fd, md.value));
    }
    d = fmt("max rel difference %.1e at 10 sample times", max_rel);
    return max_rel < 1e-3;
}

// 8. Transparency scaling: the peak shift of a fixed gentle kick falls off as
//    the inverse of the coupling once the coupling dominates the drive rate.
bool c08(std::string& d) {
    auto inner = profile("eta = 0.01*(1 - cos(0.5*tau))");
    auto traj = std::make_shared<ms::FrozenPastTrajectory>(inner, 0.0);
    ms::TrajectoryCache cache(*traj);
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;

    std::vector<double> ln_a, ln_peak;
    for (double a : {2.5, 5.0, 10.0, 20.0}) {
        ms::Coupling c{a};
        double peak = 0;
        for (int k = 1; k <= 14; ++k) {
            ms::IntegralResult mu = ms::mu_total(cache, 0.9 * static_cast<double>(k), c, qs);
            if (!mu.converged) {
                d = fmt("quadrature did not converge at a=%g", a);
                return false;
            }
            peak = std::max(peak, std::abs(mu.value));
        }
        ln_a.push_back(std::log(a));
        ln_peak.push_back(std::log(peak));
    }
    double slope = lsq_slope(ln_a, ln_peak);
    d = fmt("log-log slope %.4f over a in {2.5,5,10,20}", slope);
    return slope > -1.1 && slope < -0.9;
}

// 9. Small-velocity response is quadratic: mu/eps^2 is stable as the drive
//    amplitude eps is halved twice.
bool c09(std::string& d) {
    ms::Coupling c{1.0};
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;
    qs.abs_tol = 1e-16;
    const double tau = 2.6;
    double q[3];
    double epses[3] = {0.02, 0.01, 0.005};
    for (int i = 0; i < 3; ++i) {
        auto traj = profile(fmt("eta = %.17g*sin(0.8*tau)", epses[i]));
        ms::TrajectoryCache cache(*traj);
        ms::IntegralResult mu = ms::mu_total(cache, tau, c, qs);
        if (!mu.converged) {
            d = fmt("quadrature did not converge at eps=%g", epses[i]);
            return false;
        }
        q[i] = mu.value / (epses[i] * epses[i]);
    }
    double pair1 = std::abs(q[1] / q[0] - 1.0);
    double pair2 = std::abs(q[2] / q[1] - 1.0);
    d = fmt("mu/eps^2 pair deviations %.2e and %.2e", pair1, pair2);
    return pair1 < 0.05 && pair2 < 0.05;
}

// 10. Memory is short: twenty damping times after the motion stops, the shift
//     has relaxed below one percent of its peak.
bool c10(std::string& d) {
    ms::Coupling c{1.0};
    ms::VelocityStep st(0.0, 0.3, 1.0); // ramp over [-0.5, 0.5], then uniform
    ms::TrajectoryCache cache(st);
    double peak = 0;
    for (double tau : {-0.4, -0.2, 0.0, 0.2, 0.4, 0.5, 0.7, 1.0, 1.5, 2.5}) {
        ms::IntegralResult mu = ms::mu_total(cache, tau, c);
        if (!mu.converged) {
            d = "quadrature did not converge";
            return false;
        }
        peak = std::max(peak, std::abs(mu.value));
    }
    const double tau_late = 0.5 + 20.0 / c.a;
    ms::IntegralResult late = ms::mu_total(cache, tau_late, c);
    double bound = std::abs(late.value) + late.error_estimate + late.tail_bound;
    d = fmt("peak %.3e, |mu| at +20/a below %.1e (%.2e of peak)", peak, bound, bound / peak);
    return late.converged && bound < 0.01 * peak;
}

// 11. Backreaction dynamics: free uniform data stays uniform, the flux
//     balance differentiates the recorded mass, and step halving converges.
bool c11(std::string& d) {
    // Free evolution of uniform initial data.
    ms::DynamicsConfig free_cfg;
    free_cfg.bare_mass = 1.0;
    free_cfg.past = std::make_shared<ms::Uniform>(0.2);
    free_cfg.tau_start = 0.0;
    free_cfg.dtau = 0.1;
    ms::DynamicsResult free_run = ms::evolve(free_cfg, 50.0);
    if (free_run.halt != ms::HaltReason::Completed) {
        d = "free evolution halted early";
        return false;
    }
    double eta0 = free_run.samples.front().eta;
    double m0 = free_run.samples.front().m_total;
    double drift = 0;
    for (const ms::DynamicsSample& s : free_run.samples) {
        drift = std::max(drift, std::abs(s.alpha));
        drift = std::max(drift, std::abs(s.eta - eta0));
        drift = std::max(drift, std::abs(s.m_total - m0));
    }

    // Driven run: a smooth velocity step in the prescribed past.
    ms::DynamicsConfig cfg;
    cfg.bare_mass = 2.0;
    cfg.past = std::make_shared<ms::VelocityStep>(0.0, 0.3, 1.0);
    cfg.tau_start = 3.0;
    cfg.dtau = 0.05;
    ms::DynamicsResult coarse = ms::evolve(cfg, 5.5);
    if (coarse.halt != ms::HaltReason::Completed) {
        d = "driven evolution halted early";
        return false;
    }
    double max_rate = 0, max_resid = 0;
    const std::vector<ms::DynamicsSample>& smp = coarse.samples;
    for (std::size_t n = 0; n + 2 < smp.size(); ++n) {
        double fd = (smp[n + 2].m_total - smp[n].m_total) / (2.0 * cfg.dtau);
        double resid = fd + smp[n + 1].flux_plus + smp[n + 1].flux_minus;
        max_rate = std::max(max_rate, std::abs(smp[n + 1].m_dot));
        max_resid = std::max(max_resid, std::abs(resid));
    }
    double balance = max_resid / max_rate;

    ms::DynamicsConfig fine_cfg = cfg;
    fine_cfg.dtau = 0.025;
    ms::DynamicsResult fine = ms::evolve(fine_cfg, 5.5);
    if (fine.halt != ms::HaltReason::Completed) {
        d = "refined evolution halted early";
        return false;
    }
    const ms::DynamicsSample& ca = coarse.samples.back();
    const ms::DynamicsSample& fa = fine.samples.back();
    double dm = std::abs(ca.m_total - fa.m_total) / std::abs(fa.m_total);
    double de = std::abs(ca.eta - fa.eta) / std::abs(fa.eta);
    double dmu = std::abs(ca.m_total - fa.m_total) / std::abs(fa.m_total - cfg.bare_mass);
    d = fmt("uniform drift %.1e, flux balance %.1e, halving dm=%.1e deta=%.1e (dmu=%.1e)",
            drift, balance, dm, de, dmu);
    return drift < 1e-10 && balance < 1e-3 && dm < 1e-6 && de < 1e-6;
}

// 12. Any kick from rest raises the shift: mu > 0 just after the motion
//     starts, for ten random trigonometric kick profiles.
bool c12(std::string& d) {
    ms::SplitMix64 rng(20260822);
    ms::Coupling c{1.0};
    ms::QuadratureSpec qs;
    qs.rel_tol = 1e-9;
    qs.abs_tol = 1e-16;
    double min_mu = 1e300, min_margin = 1e300;
    for (int i = 0; i < 10; ++i) {
        double a1 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.08, 0.3);
        double b1 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.08, 0.3);
        double a2 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.08, 0.3);
        double b2 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.08, 0.3);
        double w1 = rng.uniform(0.8, 2.8);
        double w2 = rng.uniform(0.8, 2.8);
        std::string src =
            fmt("eta = %.17g*(1 - cos(%.17g*tau)) + %.17g*(%.17g*tau - sin(%.17g*tau))", a1, w1,
                b1, w1, w1) +
            fmt(" + %.17g*(1 - cos(%.17g*tau)) + %.17g*(%.17g*tau - sin(%.17g*tau))", a2, w2, b2,
                w2, w2);
        auto traj = std::make_shared<ms::FrozenPastTrajectory>(profile(src), 0.0);
        ms::TrajectoryCache cache(*traj);
        for (double tau : {0.01, 0.02, 0.03, 0.04, 0.05}) {
            ms::IntegralResult mu = ms::mu_total(cache, tau, c, qs);
            double err = mu.error_estimate + mu.tail_bound;
            if (!mu.converged) {
                d = fmt("quadrature did not converge on kick %d", i);
                return false;
            }
            min_mu = std::min(min_mu, mu.value);
            min_margin = std::min(min_margin, mu.value / std::max(err, 1e-300));
            if (!(mu.value > 0.0) || !(mu.value > err)) {
                d = fmt("kick %d: mu=%.3e err=%.1e at tau=%.3f", i, mu.value, err, tau);
                return false;
            }
        }
    }
    d = fmt("min mu %.2e, worst mu/err margin %.1f over 10 kicks", min_mu, min_margin);
    return true;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "uniform motion stays shift-free", 10, c01},
    {2, "static offset dual route", 30, c02},
    {3, "constant acceleration gives no rate", 10, c03},
    {4, "slow-motion asymptotic laws", 60, c04},
    {5, "velocity-step short-time coefficient", 120, c05},
    {6, "weak and strong rate forms agree", 60, c06},
    {7, "accumulated shift differentiates to the rate", 120, c07},
    {8, "peak shift scales inversely with coupling", 120, c08},
    {9, "small-velocity response is quadratic", 60, c09},
    {10, "shift relaxes once motion stops", 30, c10},
    {11, "backreaction dynamics consistency", 120, c11},
    {12, "kicks from rest raise the shift", 60, c12},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }

    int failures = 0, ran = 0;
    for (const Criterion& cr : kCriteria) {
        if (only != 0 && cr.id != only) continue;
        ++ran;
        std::string detail;
        bool ok = false;
        auto t0 = std::chrono::steady_clock::now();
        try {
            ok = cr.run(detail);
        } catch (const std::exception& e) {
            detail = fmt("exception: %s", e.what());
            ok = false;
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= cr.budget_s) {
            ok = false;
            detail += fmt("; over %.0f s budget", cr.budget_s);
        }
        std::printf("[%s] criterion %02d %s: %s (%.1f s)\n", ok ? "PASS" : "FAIL", cr.id, cr.name,
                    detail.c_str(), secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion with id %d\n", only);
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
