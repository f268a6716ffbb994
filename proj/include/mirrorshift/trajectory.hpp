#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mirrorshift/expr.hpp"
#include "mirrorshift/taylor.hpp"

namespace mirrorshift {

struct WorldlinePoint {
    double zplus = 0.0;
    double zminus = 0.0;
};

/// Worldline sample in null coordinates z = z0 +- z1, parametrized by proper
/// time: d1plus * d1minus = 1, alpha = d2plus/d1plus = -d2minus/d1minus, and
/// eta = ln d1plus.
struct TrajectoryState {
    double tau = 0.0;
    WorldlinePoint z;
    double d1plus = 1.0, d1minus = 1.0;
    double d2plus = 0.0, d2minus = 0.0;
    double d3plus = 0.0, d3minus = 0.0;
    double d4plus = 0.0, d4minus = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
};

struct NullSeparation {
    double dzplus = 0.0;
    double dzminus = 0.0;
};

/// Smoothness class of tau -> z(tau): c0 means the velocity may jump at
/// breakpoints, c1 means the acceleration may jump, cinf means no breakpoints
/// at all.
enum class Smoothness { c0, c1, c2, cinf };

class Trajectory {
  public:
    virtual ~Trajectory() = default;

    virtual TrajectoryState state(double tau) const = 0;

    /// z(tau1) - z(tau2) in both null coordinates, computed to high relative
    /// accuracy even when tau1 - tau2 is small.
    virtual NullSeparation null_separation(double tau1, double tau2) const = 0;

    /// Proper times where smoothness drops below C1; integration domains must
    /// be subdivided here.
    virtual std::vector<double> breakpoints() const { return {}; }

    /// Proper time before which the motion is exactly uniform (alpha = 0), if
    /// any.
    virtual std::optional<double> uniform_before() const { return std::nullopt; }

    virtual Smoothness smoothness() const { return Smoothness::cinf; }

    /// True when null_separation is closed-form to full precision at any
    /// separation (no quadrature involved).
    virtual bool exact_separation() const { return false; }

    virtual std::string describe() const = 0;
};

/// Builds a full state from the rapidity jet at tau and the two positions.
/// z+' = e^eta and z-' = e^-eta, so all z derivatives follow from the jet and
/// the normalization holds by construction.
TrajectoryState make_state(double tau, const Jet4& eta_jet, double zplus, double zminus);

class Uniform final : public Trajectory {
  public:
    explicit Uniform(double beta);
    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;
    std::optional<double> uniform_before() const override;
    bool exact_separation() const override { return true; }
    std::string describe() const override;
    double beta() const { return beta_; }

  private:
    double beta_, d1plus_, d1minus_, eta_;
};

/// Eternal or switched-on hyperbolic motion: eta = alpha0 * tau for
/// tau > tau0, uniform before tau0 (tau0 = -infinity gives the eternal
/// family). In the hyperbolic region z+ = (e^{alpha0 tau} - 1)/alpha0.
class Hyperbolic final : public Trajectory {
  public:
    explicit Hyperbolic(double alpha0,
                        double tau0 = -std::numeric_limits<double>::infinity());
    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;
    std::vector<double> breakpoints() const override;
    std::optional<double> uniform_before() const override;
    Smoothness smoothness() const override;
    bool exact_separation() const override { return true; }
    std::string describe() const override;
    double alpha0() const { return alpha0_; }

  private:
    bool hyperbolic_at(double tau) const { return tau >= tau0_; }
    double zplus_at(double tau) const;
    double zminus_at(double tau) const;
    double alpha0_, tau0_;
};

namespace detail {

/// Antiderivative F(tau) = int_anchor^tau f, cached on a uniform segment grid.
/// Each segment carries a fixed Gauss-Kronrod subpanel grid chosen from the
/// integrand's variation, so F(tau) is smooth in tau within a segment and
/// continuous across edges; checkpoint sums accumulate in long double.
class AntiderivativeCache {
  public:
    AntiderivativeCache(std::function<double(double)> f, double anchor, double spacing);
    double eval(double tau) const;

  private:
    struct Segment {
        long double f_start = 0.0;
        int subpanels = 1;
        std::vector<long double> prefix; // cumulative subpanel integrals
    };
    const Segment& segment_for(long long j) const;
    Segment build_segment(long long j, long double f_start) const;
    long double subpanel_integral(double lo, double hi) const;

    std::function<double(double)> f_;
    double anchor_, spacing_;
    mutable std::mutex mutex_;
    mutable std::map<long long, Segment> segments_;
    mutable long long built_lo_ = 1, built_hi_ = -1; // empty range
};

} // namespace detail

/// Base for families defined by a rapidity profile whose positions are
/// recovered by quadrature of e^{+-eta} from a fixed anchor.
class RapidityTrajectory : public Trajectory {
  public:
    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;

  protected:
    /// Rapidity jet (value and first four derivatives) at tau.
    virtual Jet4 eta_jet(double tau) const = 0;
    virtual double eta_value(double tau) const { return eta_jet(tau).value(); }
    /// Must be called once by the derived constructor.
    void init_position_caches(double anchor, double spacing = 0.5);

  private:
    std::unique_ptr<detail::AntiderivativeCache> zplus_, zminus_;
};

/// Constant-velocity plateaus joined by a C-infinity rapidity step of the
/// given width; width zero degenerates to a sharp velocity jump with a
/// declared breakpoint at tau = 0 (state(0) reports the post-jump side).
class VelocityStep final : public RapidityTrajectory {
  public:
    VelocityStep(double beta_i, double beta_f, double width);
    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;
    std::vector<double> breakpoints() const override;
    std::optional<double> uniform_before() const override;
    Smoothness smoothness() const override;
    bool exact_separation() const override { return width_ == 0.0; }
    std::string describe() const override;

  protected:
    Jet4 eta_jet(double tau) const override;
    double eta_value(double tau) const override;

  private:
    double beta_i_, beta_f_, width_, eta_i_, eta_f_;
};

/// Hyperbolic motion switched on smoothly over [tau0, tau0 + width]:
/// eta = alpha0 * width * L((tau - tau0)/width) with L(x) = x * s(x) and s a
/// C-infinity unit smoothstep, so the motion is exactly uniform before tau0
/// and exactly hyperbolic after tau0 + width.
class HyperbolicSmooth final : public RapidityTrajectory {
  public:
    HyperbolicSmooth(double alpha0, double tau0, double width);
    std::optional<double> uniform_before() const override;
    std::string describe() const override;

  protected:
    Jet4 eta_jet(double tau) const override;
    double eta_value(double tau) const override;

  private:
    double alpha0_, tau0_, width_;
};

/// Profile-driven trajectory from the expression DSL: eta given directly, or
/// alpha integrated to eta with eta(anchor) = 0.
class RapidityProfile final : public RapidityTrajectory {
  public:
    explicit RapidityProfile(ProfileSpec spec, double tau_ref = 0.0);
    Smoothness smoothness() const override;
    std::string describe() const override;

  protected:
    Jet4 eta_jet(double tau) const override;
    double eta_value(double tau) const override;

  private:
    ProfileSpec spec_;
    double tau_ref_;
    bool has_abs_ = false;
    std::unique_ptr<detail::AntiderivativeCache> eta_integral_; // alpha profiles only
};

/// Wrapper freezing the motion to exact uniformity before tau_freeze, with
/// positions joined continuously; supplies the "uniform in the infinite past"
/// precondition for arbitrary profiles.
class FrozenPastTrajectory final : public Trajectory {
  public:
    FrozenPastTrajectory(std::shared_ptr<const Trajectory> inner, double tau_freeze);
    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;
    std::vector<double> breakpoints() const override;
    std::optional<double> uniform_before() const override;
    Smoothness smoothness() const override;
    bool exact_separation() const override;
    std::string describe() const override;

  private:
    std::shared_ptr<const Trajectory> inner_;
    double tau_freeze_;
    TrajectoryState frozen_; // inner state at tau_freeze
};

/// z_new(tau) = lambda * z(tau / lambda); rapidity is unchanged, derivatives
/// of order n scale by lambda^{1-n}.
std::shared_ptr<const Trajectory> rescale(std::shared_ptr<const Trajectory> traj, double lambda);

/// Per-computation memo of trajectory states keyed by the bit pattern of tau,
/// with a separation policy that keeps near-diagonal differences relatively
/// accurate. Not thread-safe; each worker builds its own.
class TrajectoryCache {
  public:
    explicit TrajectoryCache(const Trajectory& traj)
        : traj_(&traj), exact_(traj.exact_separation()), breakpoints_(traj.breakpoints()),
          smoothness_(traj.smoothness()) {}

    const TrajectoryState& state(double tau);
    NullSeparation null_separation(double tau1, double tau2);
    const Trajectory& trajectory() const { return *traj_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    Smoothness smoothness() const { return smoothness_; }

    /// True when a breakpoint lies inside the closed interval spanned by the
    /// two times (kernel series and mixed-derivative branches refuse these).
    bool interval_hits_breakpoint(double tau1, double tau2) const;

  private:
    const Trajectory* traj_;
    bool exact_;
    std::vector<double> breakpoints_;
    Smoothness smoothness_;
    std::unordered_map<std::uint64_t, TrajectoryState> memo_;
};

} // namespace mirrorshift
