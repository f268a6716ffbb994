#include "mirrorshift/massshift.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mirrorshift/errors.hpp"
#include "mirrorshift/kernel.hpp"

namespace mirrorshift {

namespace detail {
double mu1_prefactor_scale = 1.0;
} // namespace detail

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;

double log_gamma_term(double a) { return std::log(a / 2.0) + kEulerGamma; }

double e_half(double s, double tau, double a) { return std::exp(0.5 * a * (s - tau)); }

/// Crude magnitude bound of an undamped two-point function over the history
/// window; feeds only the certified-tail report, so moderate slack is fine.
double sampled_envelope(double tau, double a, double lambda,
                        const std::function<double(double, double)>& g) {
    double m = 0.0;
    for (double frac : {0.9, 0.5, 0.25, 0.1, 0.02}) {
        double s = tau - frac * lambda / a;
        m = std::max(m, std::abs(g(tau, s)));
        m = std::max(m, std::abs(g(s, s - 0.5 / a)));
    }
    return 2.0 * m + 1e-6;
}

/// Strong form is reserved for globally smooth worldlines; anything with a
/// breakpoint (or an explicit roughness grade) integrates by parts instead.
bool strong_form_ok(TrajectoryCache& traj) {
    return traj.smoothness() == Smoothness::cinf && traj.breakpoints().empty();
}

IntegralResult combine_two(double c1, const IntegralResult& r1, double c2,
                           const IntegralResult& r2) {
    IntegralResult out;
    out.value = c1 * r1.value + c2 * r2.value;
    out.error_estimate = std::abs(c1) * r1.error_estimate + std::abs(c2) * r2.error_estimate;
    out.tail_bound = std::abs(c1) * r1.tail_bound + std::abs(c2) * r2.tail_bound;
    out.evaluations = r1.evaluations + r2.evaluations;
    out.converged = r1.converged && r2.converged;
    return out;
}

} // namespace

void Coupling::validate() const {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("coupling a must be positive and finite");
}

double mu0_closed_form(double a) {
    Coupling{a}.validate();
    return a / (4.0 * kPi) * (-std::log(a / 2.0) - kEulerGamma);
}

IntegralResult mu0_numeric(double a, const QuadratureSpec& spec) {
    Coupling{a}.validate();
    // Rest worldline at tau = 0: dz+ dz- = (tau1 - tau2)^2 exactly, so both
    // history integrals reduce to damped integrals of the bare logarithm.
    // Exercising them through the generic singular quadrature provides the
    // independent cross-check of the closed form.
    double lo = -spec.window_lambda / a;
    double pref1 = detail::mu1_prefactor_scale * a * a / (8.0 * kPi);
    IntegralResult i1 = integrate_log_singular(
        [=](double s) { return 2.0 * pref1 * e_half(s, 0.0, a); }, 0.0, lo, 0.0, spec);
    double log_edge = 1.0 + std::abs(std::log(spec.window_lambda / a));
    double tail1 = (4.0 * pref1 / a) * log_edge * std::exp(-0.5 * spec.window_lambda);

    double pref2 = a * a * a / (32.0 * kPi);
    IntegralResult i2 = integrate_history_2d(
        [=](double s1, double s2) { return -pref2 * damping_weight(s1, s2, 0.0, a); }, 0.0, a,
        spec, {.symmetric = true, .log_diagonal = true}, 2.0 * pref2 * log_edge);

    IntegralResult out = combine_two(1.0, i1, 1.0, i2);
    out.tail_bound += tail1;
    return out;
}

IntegralResult mu_total(TrajectoryCache& traj, double tau, const Coupling& c,
                        const QuadratureSpec& spec) {
    c.validate();
    double a = c.a;
    const std::vector<double>& bks = traj.breakpoints();

    double env = sampled_envelope(tau, a, spec.window_lambda, [&](double t1, double t2) {
        return log_ratio(traj, t1, t2, a);
    });

    IntegralResult i1 = integrate_history_1d(
        [&](double s) { return log_ratio(traj, tau, s, a) * e_half(s, tau, a); }, tau, a, spec,
        env, bks);
    IntegralResult i2 = integrate_history_2d(
        [&](double s1, double s2) {
            return log_ratio(traj, s1, s2, a) * damping_weight(s1, s2, tau, a);
        },
        tau, a, spec, {.symmetric = true}, env, bks);

    // The full logarithm splits as ln[dz+ dz-] = ln[dz+ dz- / dtau^2]
    // + ln(dtau^2); the second piece integrates in closed form against both
    // damping kernels, and those closed-form parts reproduce exactly the
    // uniform-worldline constant that the redefinition subtracts.
    double pref1 = a * a / (8.0 * kPi);
    double pref2 = a * a * a / (32.0 * kPi);
    double lg = log_gamma_term(a);
    double mu1 = detail::mu1_prefactor_scale * (pref1 * i1.value - a / (2.0 * kPi) * lg);
    double mu2 = -pref2 * i2.value + a / (4.0 * kPi) * lg;

    IntegralResult out = combine_two(pref1, i1, pref2, i2);
    out.value = mu1 + mu2 - mu0_closed_form(a);
    return out;
}

IntegralResult mu_dot_weak(TrajectoryCache& traj, double tau, const Coupling& c,
                           const QuadratureSpec& spec) {
    c.validate();
    double a = c.a;
    const std::vector<double>& bks = traj.breakpoints();

    double env = sampled_envelope(tau, a, spec.window_lambda, [&](double t1, double t2) {
        return kernel_K(traj, t1, t2, a).sum;
    });

    IntegralResult i1 = integrate_history_1d(
        [&](double s) { return kernel_K(traj, tau, s, a).sum * e_half(s, tau, a); }, tau, a,
        spec, env, bks);
    IntegralResult i2 = integrate_history_2d(
        [&](double s1, double s2) {
            return kernel_K(traj, s1, s2, a).sum * damping_weight(s1, s2, tau, a);
        },
        tau, a, spec, {.symmetric = true}, env, bks);

    return combine_two(a * a / (8.0 * kPi), i1, -a * a * a / (32.0 * kPi), i2);
}

IntegralResult mu_dot_strong(TrajectoryCache& traj, double tau, const Coupling& c,
                             const QuadratureSpec& spec) {
    c.validate();
    double a = c.a;
    const std::vector<double>& bks = traj.breakpoints();

    double env = sampled_envelope(tau, a, spec.window_lambda, [&](double t1, double t2) {
        return kernel_mixed_derivative(traj, t1, t2, a);
    });

    IntegralResult i2 = integrate_history_2d(
        [&](double s1, double s2) {
            return kernel_mixed_derivative(traj, s1, s2, a) * damping_weight(s1, s2, tau, a);
        },
        tau, a, spec, {.symmetric = true}, env, bks);

    return combine_two(-a / (8.0 * kPi), i2, 0.0, IntegralResult{});
}

IntegralResult mu_dot(TrajectoryCache& traj, double tau, const Coupling& c,
                      const QuadratureSpec& spec) {
    return strong_form_ok(traj) ? mu_dot_strong(traj, tau, c, spec)
                                : mu_dot_weak(traj, tau, c, spec);
}

FluxPair flux_weak(TrajectoryCache& traj, double tau, const Coupling& c,
                   const QuadratureSpec& spec) {
    c.validate();
    double a = c.a;
    const std::vector<double>& bks = traj.breakpoints();
    double alpha = traj.state(tau).alpha;

    double env = sampled_envelope(tau, a, spec.window_lambda, [&](double t1, double t2) {
        KernelValue kv = kernel_K(traj, t1, t2, a);
        return std::max(std::abs(kv.kplus), std::abs(kv.kminus));
    });

    auto one_d = [&](bool plus) {
        return integrate_history_1d(
            [&, plus](double s) {
                KernelValue kv = kernel_K(traj, tau, s, a);
                return (plus ? kv.kplus : kv.kminus) * e_half(s, tau, a);
            },
            tau, a, spec, env, bks);
    };
    auto two_d = [&](bool plus) {
        return integrate_history_2d(
            [&, plus](double s1, double s2) {
                KernelValue kv = kernel_K(traj, s1, s2, a);
                return (plus ? kv.kplus : kv.kminus) * damping_weight(s1, s2, tau, a);
            },
            tau, a, spec, {.symmetric = true}, env, bks);
    };

    double pref = a / (8.0 * kPi);
    FluxPair out;
    out.plus = combine_two(-pref * a, one_d(true), pref * a * a / 4.0, two_d(true));
    out.plus.value += pref * alpha;
    out.minus = combine_two(-pref * a, one_d(false), pref * a * a / 4.0, two_d(false));
    out.minus.value -= pref * alpha;
    return out;
}

FluxPair flux_strong(TrajectoryCache& traj, double tau, const Coupling& c,
                     const QuadratureSpec& spec) {
    c.validate();
    double a = c.a;
    const std::vector<double>& bks = traj.breakpoints();

    double env = sampled_envelope(tau, a, spec.window_lambda, [&](double t1, double t2) {
        return std::max(std::abs(kernel_mixed_plus(traj, t1, t2, a)),
                        std::abs(kernel_mixed_minus(traj, t1, t2, a)));
    });

    auto two_d = [&](bool plus) {
        return integrate_history_2d(
            [&, plus](double s1, double s2) {
                double m = plus ? kernel_mixed_plus(traj, s1, s2, a)
                                : kernel_mixed_minus(traj, s1, s2, a);
                return m * damping_weight(s1, s2, tau, a);
            },
            tau, a, spec, {.symmetric = true}, env, bks);
    };

    double pref = a / (8.0 * kPi);
    FluxPair out;
    out.plus = combine_two(pref, two_d(true), 0.0, IntegralResult{});
    out.minus = combine_two(pref, two_d(false), 0.0, IntegralResult{});
    return out;
}

FluxPair flux_pair(TrajectoryCache& traj, double tau, const Coupling& c,
                   const QuadratureSpec& spec) {
    return strong_form_ok(traj) ? flux_strong(traj, tau, c, spec)
                                : flux_weak(traj, tau, c, spec);
}

double mu_asymptotic(double alpha, double a) {
    Coupling{a}.validate();
    return alpha * alpha / (48.0 * kPi * a);
}

double mu_dot_asymptotic(double alpha, double alpha_dot, double alpha_ddot, double a) {
    Coupling{a}.validate();
    return (alpha * alpha_dot / a - (alpha * alpha_ddot + alpha_dot * alpha_dot) / (a * a)) /
           (24.0 * kPi);
}

double step_coefficient(double beta_i, double beta_f, double a) {
    Coupling{a}.validate();
    if (!(std::abs(beta_i) < 1.0) || !(std::abs(beta_f) < 1.0))
        throw DomainError("step velocities must satisfy |beta| < 1");
    double gi = 1.0 / std::sqrt(1.0 - beta_i * beta_i);
    double gf = 1.0 / std::sqrt(1.0 - beta_f * beta_f);
    return a / (4.0 * kPi) * (gi * gf * (1.0 - beta_i * beta_f) - 1.0);
}

MassShiftSeries compute_series(const Trajectory& traj, double tau_start, double tau_end,
                               double dtau, const Coupling& c, const QuadratureSpec& spec) {
    c.validate();
    if (!(dtau > 0.0)) throw ConfigError("series spacing dtau must be positive");
    if (!(tau_start < tau_end)) throw ConfigError("series needs tau_start < tau_end");
    std::optional<double> ub = traj.uniform_before();
    if (!ub)
        throw ConfigError("series accumulation needs a trajectory with a uniform past "
                          "(freeze or restrict the profile)");

    TrajectoryCache cache(traj);
    double a = c.a;

    std::size_t count = static_cast<std::size_t>(
                            std::floor((tau_end - tau_start) / dtau + 1e-9)) + 1;

    // mu accumulates d mu / d tau from the onset of motion; before it the
    // redefinition pins mu to zero identically.
    QuadratureSpec acc = spec;
    acc.rel_tol = 1e-9;
    acc.max_subdivisions = 400;

    MassShiftSeries series;
    series.reserve(count);
    double mu_acc = 0.0;
    double err_acc = 0.0;
    bool ok_acc = true;
    double prev = *ub;

    for (std::size_t i = 0; i < count; ++i) {
        double t = tau_start + dtau * static_cast<double>(i);
        MassShiftSample s;
        s.tau = t;
        s.alpha = cache.state(t).alpha;

        FluxPair fp = flux_pair(cache, t, c, spec);
        IntegralResult md = mu_dot(cache, t, c, spec);
        s.flux_plus = fp.plus.value;
        s.flux_minus = fp.minus.value;
        s.mu_dot = md.value;

        if (std::isfinite(prev) && t > prev) {
            acc.abs_tol = 1e-9 * a * (t - prev);
            IntegralResult seg = integrate_interval(
                [&](double u) { return mu_dot(cache, u, c, spec).value; }, prev, t, acc);
            mu_acc += seg.value;
            err_acc += seg.error_estimate +
                       (md.error_estimate + md.tail_bound) * (t - prev);
            ok_acc = ok_acc && seg.converged;
            prev = t;
        }
        s.mu = mu_acc;
        s.err = err_acc + md.error_estimate + md.tail_bound;
        s.converged = ok_acc && md.converged && fp.plus.converged && fp.minus.converged;
        series.push_back(s);
    }
    return series;
}

} // namespace mirrorshift
