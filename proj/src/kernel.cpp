#include "mirrorshift/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mirrorshift/errors.hpp"

namespace mirrorshift {

namespace {

/// alpha and its first two proper-time derivatives, recovered from the
/// null-velocity derivative ladder of a single state.
struct LocalDerivs {
    double alpha;
    double alpha_dot;
    double alpha_ddot;
};

LocalDerivs local_derivs(const TrajectoryState& s) {
    double al = s.alpha;
    double r3 = s.d3plus / s.d1plus;
    double ald = r3 - al * al;
    double r4 = s.d4plus / s.d1plus;
    double aldd = r4 - 3.0 * al * ald - al * al * al;
    return {al, ald, aldd};
}

/// Velocity differences e^{eta(hi)} - e^{eta(lo)} and the minus-coordinate
/// analogue, in expm1 form so the result keeps full relative accuracy when
/// the rapidities are close.
struct VelocityDiffs {
    double dplus;
    double dminus;
};

VelocityDiffs velocity_diffs(const TrajectoryState& shi, const TrajectoryState& slo) {
    double de = shi.eta - slo.eta;
    return {slo.d1plus * std::expm1(de), slo.d1minus * std::expm1(-de)};
}

double mixed_coord(double u1dot, double u2dot, double u1dd, double u2dd, double num, double den) {
    double k = num / den;
    return (u1dd * u2dot + u2dd * u1dot - 2.0 * k * u1dot * u2dot) / (den * den);
}

void require_positive_separation(const NullSeparation& dz) {
    if (!(dz.dzplus > 0.0) || !(dz.dzminus > 0.0))
        throw DomainError("kernel: degenerate null separation between distinct proper times");
}

} // namespace

double delta_switch(double alpha, double a) {
    double scale = std::numeric_limits<double>::infinity();
    if (std::abs(alpha) > 0.0) scale = 1.0 / std::abs(alpha);
    if (a > 0.0) scale = std::min(scale, 1.0 / a);
    if (!std::isfinite(scale)) scale = 1.0;
    return std::max(1e-3 * scale, 1e-12);
}

KernelValue kernel_K(TrajectoryCache& traj, double tau1, double tau2, double a,
                     bool require_smooth) {
    bool straddle = traj.interval_hits_breakpoint(tau1, tau2);
    if (straddle && require_smooth)
        throw DomainError("kernel_K: interval crosses a trajectory breakpoint; "
                          "subdivide there before requesting smooth evaluation");

    if (tau1 == tau2) {
        const TrajectoryState& s = traj.state(tau1);
        return {s.alpha, -s.alpha, 0.0, std::nullopt};
    }

    double hi = std::max(tau1, tau2);
    double lo = std::min(tau1, tau2);
    double dt = hi - lo;

    if (!straddle) {
        double m = 0.5 * (hi + lo);
        const TrajectoryState& sm = traj.state(m);
        if (dt < delta_switch(sm.alpha, a)) {
            LocalDerivs d = local_derivs(sm);
            double d2 = dt * dt;
            double a2p = (d.alpha_ddot + 2.0 * d.alpha * d.alpha_dot) / 24.0;
            double a2m = (-d.alpha_ddot + 2.0 * d.alpha * d.alpha_dot) / 24.0;
            KernelValue kv;
            kv.kplus = d.alpha + a2p * d2;
            kv.kminus = -d.alpha + a2m * d2;
            kv.sum = (d.alpha * d.alpha_dot / 6.0) * d2;
            return kv;
        }
    }

    const TrajectoryState& shi = traj.state(hi);
    const TrajectoryState& slo = traj.state(lo);
    NullSeparation dz = traj.null_separation(hi, lo);
    require_positive_separation(dz);
    VelocityDiffs dv = velocity_diffs(shi, slo);
    KernelValue kv;
    kv.kplus = dv.dplus / dz.dzplus;
    kv.kminus = dv.dminus / dz.dzminus;
    kv.sum = kv.kplus + kv.kminus;
    return kv;
}

namespace {

void require_mixed_smoothness(TrajectoryCache& traj, double tau1, double tau2) {
    if (traj.smoothness() == Smoothness::c0)
        throw DomainError("kernel mixed derivative: trajectory has a velocity discontinuity; "
                          "use the weak (integrated-by-parts) form instead");
    if (traj.interval_hits_breakpoint(tau1, tau2))
        throw DomainError("kernel mixed derivative: interval touches a trajectory breakpoint; "
                          "subdivide there or use the weak form");
}

enum class MixedPart { Plus, Minus, Sum };

double mixed_eval(TrajectoryCache& traj, double tau1, double tau2, double a, MixedPart part) {
    require_mixed_smoothness(traj, tau1, tau2);

    double hi = std::max(tau1, tau2);
    double lo = std::min(tau1, tau2);
    double dt = hi - lo;
    double m = 0.5 * (hi + lo);
    const TrajectoryState& sm = traj.state(m);

    if (dt < delta_switch(sm.alpha, a)) {
        LocalDerivs d = local_derivs(sm);
        switch (part) {
            case MixedPart::Plus: return (d.alpha_ddot - d.alpha * d.alpha_dot) / 6.0;
            case MixedPart::Minus: return (-d.alpha_ddot - d.alpha * d.alpha_dot) / 6.0;
            case MixedPart::Sum: return -d.alpha * d.alpha_dot / 3.0;
        }
    }

    const TrajectoryState& s1 = traj.state(hi);
    const TrajectoryState& s2 = traj.state(lo);
    NullSeparation dz = traj.null_separation(hi, lo);
    require_positive_separation(dz);
    VelocityDiffs dv = velocity_diffs(s1, s2);

    double mp = 0.0;
    double mm = 0.0;
    if (part != MixedPart::Minus)
        mp = mixed_coord(s1.d1plus, s2.d1plus, s1.d2plus, s2.d2plus, dv.dplus, dz.dzplus);
    if (part != MixedPart::Plus)
        mm = mixed_coord(s1.d1minus, s2.d1minus, s1.d2minus, s2.d2minus, dv.dminus, dz.dzminus);
    switch (part) {
        case MixedPart::Plus: return mp;
        case MixedPart::Minus: return mm;
        default: return mp + mm;
    }
}

} // namespace

double kernel_mixed_derivative(TrajectoryCache& traj, double tau1, double tau2, double a) {
    return mixed_eval(traj, tau1, tau2, a, MixedPart::Sum);
}

double kernel_mixed_plus(TrajectoryCache& traj, double tau1, double tau2, double a) {
    return mixed_eval(traj, tau1, tau2, a, MixedPart::Plus);
}

double kernel_mixed_minus(TrajectoryCache& traj, double tau1, double tau2, double a) {
    return mixed_eval(traj, tau1, tau2, a, MixedPart::Minus);
}

double damping_weight(double tau1, double tau2, double tau, double a) {
    return std::exp(a * (0.5 * (tau1 + tau2) - tau));
}

double log_ratio(TrajectoryCache& traj, double tau1, double tau2, double a) {
    if (tau1 == tau2) return 0.0;

    double hi = std::max(tau1, tau2);
    double lo = std::min(tau1, tau2);
    double dt = hi - lo;

    if (!traj.interval_hits_breakpoint(tau1, tau2)) {
        double m = 0.5 * (hi + lo);
        const TrajectoryState& sm = traj.state(m);
        if (dt < delta_switch(sm.alpha, a)) {
            double al = sm.alpha;
            return al * al * dt * dt / 12.0;
        }
    }

    NullSeparation dz = traj.null_separation(hi, lo);
    require_positive_separation(dz);
    return std::log(dz.dzplus / dt) + std::log(dz.dzminus / dt);
}

KernelValue kernel_K(const Trajectory& traj, double tau1, double tau2, double a) {
    TrajectoryCache cache(traj);
    return kernel_K(cache, tau1, tau2, a);
}

double kernel_mixed_derivative(const Trajectory& traj, double tau1, double tau2, double a) {
    TrajectoryCache cache(traj);
    return kernel_mixed_derivative(cache, tau1, tau2, a);
}

} // namespace mirrorshift
