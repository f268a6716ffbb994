#pragma once

#include <functional>
#include <span>

namespace mirrorshift {

/// Tolerances and truncation policy for history integrals. The semi-infinite
/// past is cut at tau - window_lambda/a, where the exponential damping has
/// decayed to e^{-window_lambda/2}; the discarded tail is reported as a
/// certified bound, never silently dropped.
struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double window_lambda = 40.0;
    int max_subdivisions = 2000;
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    double tail_bound = 0.0;
    long long evaluations = 0;
    bool converged = true;
};

using Integrand1D = std::function<double(double)>;
using Integrand2D = std::function<double(double, double)>;

/// Adaptive Gauss-Kronrod integration of f over [lo, hi], pre-split at the
/// given breakpoints. Building block for the history integrators and for
/// position recovery in the trajectory module.
IntegralResult integrate_interval(const Integrand1D& f, double lo, double hi,
                                  const QuadratureSpec& spec = {},
                                  std::span<const double> breakpoints = {});

/// Integral of f over the damped history (-inf, tau], truncated at
/// tau - window_lambda/a. envelope_m is the caller's bound M with
/// |f(s)| <= M e^{a(s-tau)/2} (1 + |ln(tau-s)|); the reported tail_bound is
/// (2M/a) e^{-window_lambda/2}.
IntegralResult integrate_history_1d(const Integrand1D& f, double tau, double a,
                                    const QuadratureSpec& spec = {}, double envelope_m = 1.0,
                                    std::span<const double> breakpoints = {});

/// Integral of f_regular(s) * ln|s - singular_at| over [lo, hi], with nodes
/// graded geometrically into the singular point and an analytic treatment of
/// the innermost sliver. singular_at may be an endpoint, interior, or outside
/// the range (in which case the weight is smooth and plain adaptive GK is
/// used).
IntegralResult integrate_log_singular(const Integrand1D& f_regular, double singular_at, double lo,
                                      double hi, const QuadratureSpec& spec = {});

struct Integrand2DFlags {
    /// g(t1, t2) == g(t2, t1): integrate t2 <= t1 and double the off-diagonal
    /// cells.
    bool symmetric = false;
    /// The integral carries a ln((t1-t2)^2) weight which the integrator
    /// supplies itself; g must be the smooth cofactor only. Reduced to a
    /// one-dimensional log-singular integral of the lag correlation
    /// H(u) = int g(s+u, s) ds. Requires symmetric.
    bool log_diagonal = false;
};

/// Double integral of g over (-inf, tau]^2 truncated to the square window
/// [tau - window_lambda/a, tau]^2, subdivided at breakpoints in both axes.
/// envelope_m bounds |g| / e^{a((t1+t2)/2 - tau)} over the window up to log
/// factors; tail_bound is (8M/a^2) e^{-window_lambda/2}.
IntegralResult integrate_history_2d(const Integrand2D& g, double tau, double a,
                                    const QuadratureSpec& spec = {}, Integrand2DFlags flags = {},
                                    double envelope_m = 1.0,
                                    std::span<const double> breakpoints = {});

} // namespace mirrorshift
