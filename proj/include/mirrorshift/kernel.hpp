#pragma once

#include <optional>

#include "mirrorshift/trajectory.hpp"

namespace mirrorshift {

/// Memory-kernel values at a pair of proper times: K+- are the difference
/// quotients of the null velocities, sum = kplus + kminus (evaluated to full
/// relative accuracy near the diagonal, where the leading terms cancel), and
/// mixed_deriv_sum, when requested, is d/dtau1 d/dtau2 (K+ + K-).
struct KernelValue {
    double kplus = 0.0;
    double kminus = 0.0;
    double sum = 0.0;
    std::optional<double> mixed_deriv_sum;
};

/// Near-diagonal switch distance 1e-3 * min(1/|alpha|, 1/a), floored at
/// 1e-12. Pass a = 0 when no coupling scale applies.
double delta_switch(double alpha, double a);

/// K+-(tau1, tau2) with automatic near-diagonal series branch. Exactly
/// symmetric under argument swap. require_smooth rejects evaluation across a
/// breakpoint (callers on the strong path subdivide there instead).
KernelValue kernel_K(TrajectoryCache& traj, double tau1, double tau2, double a = 0.0,
                     bool require_smooth = false);

/// d/dtau1 d/dtau2 (K+ + K-), analytically from z derivatives to 3rd order.
/// Rejects trajectories without a C3 neighborhood of the arguments.
double kernel_mixed_derivative(TrajectoryCache& traj, double tau1, double tau2, double a = 0.0);

/// Per-coordinate mixed derivatives d1 d2 K+ and d1 d2 K- (flux split).
double kernel_mixed_plus(TrajectoryCache& traj, double tau1, double tau2, double a = 0.0);
double kernel_mixed_minus(TrajectoryCache& traj, double tau1, double tau2, double a = 0.0);

/// exp(a ((tau1+tau2)/2 - tau)); lies in (0, 1] for tau1, tau2 <= tau.
double damping_weight(double tau1, double tau2, double tau, double a);

/// ln[ dz+ dz- / (tau1-tau2)^2 ]: the smooth residual of the logarithm of the
/// null-coordinate differences, with series branch alpha^2 Delta^2 / 12 near
/// the diagonal (exact 0 at coincidence).
double log_ratio(TrajectoryCache& traj, double tau1, double tau2, double a = 0.0);

// Convenience overloads building a throwaway cache (tests and one-off use).
KernelValue kernel_K(const Trajectory& traj, double tau1, double tau2, double a = 0.0);
double kernel_mixed_derivative(const Trajectory& traj, double tau1, double tau2, double a = 0.0);

} // namespace mirrorshift
