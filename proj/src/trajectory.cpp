#include "mirrorshift/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "mirrorshift/errors.hpp"
#include "mirrorshift/gauss_kronrod.hpp"
#include "mirrorshift/quadrature.hpp"

namespace mirrorshift {

namespace {

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

void require_finite_tau(double tau) {
    if (!std::isfinite(tau)) throw DomainError("trajectory evaluated at non-finite tau");
}

/// Below this separation, null differences come from a direct quadrature of
/// e^{+-eta} (relative accuracy survives the tiny interval); above it, the
/// cached antiderivatives are far cheaper and their cancellation loses at
/// most a few digits of an O(1) quantity.
constexpr double kNullDirectThreshold = 1.0 / 64.0;

double gk15_plain(const std::function<double(double)>& f, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    const auto& r = gk::rule15;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 15; ++i) acc += r.wk[i] * f(c + h * r.x[i]);
    return acc * h;
}

const QuadratureSpec& tight_spec() {
    static const QuadratureSpec spec{1e-13, 1e-300, 40.0, 2000};
    return spec;
}

} // namespace

TrajectoryState make_state(double tau, const Jet4& eta_jet, double zplus, double zminus) {
    require_finite_tau(tau);
    Jet4 up = exp(eta_jet);
    Jet4 um = exp(-eta_jet);
    TrajectoryState s;
    s.tau = tau;
    s.z = {zplus, zminus};
    s.d1plus = up.value();
    s.d2plus = up.derivative(1);
    s.d3plus = up.derivative(2);
    s.d4plus = up.derivative(3);
    s.d1minus = um.value();
    s.d2minus = um.derivative(1);
    s.d3minus = um.derivative(2);
    s.d4minus = um.derivative(3);
    s.eta = eta_jet.value();
    s.alpha = eta_jet.derivative(1);
    for (double v : {s.z.zplus, s.z.zminus, s.d1plus, s.d1minus, s.d2plus, s.d2minus, s.d3plus,
                     s.d3minus, s.d4plus, s.d4minus, s.eta, s.alpha})
        if (!std::isfinite(v)) throw DomainError(fmt("non-finite trajectory state at tau=%.17g", tau));
    return s;
}

// ---------------------------------------------------------------- Uniform

Uniform::Uniform(double beta) : beta_(beta) {
    if (!(std::isfinite(beta) && std::abs(beta) < 1.0))
        throw DomainError("uniform trajectory requires |beta| < 1");
    d1plus_ = std::sqrt((1.0 + beta) / (1.0 - beta));
    d1minus_ = std::sqrt((1.0 - beta) / (1.0 + beta));
    eta_ = std::log(d1plus_);
}

TrajectoryState Uniform::state(double tau) const {
    require_finite_tau(tau);
    TrajectoryState s;
    s.tau = tau;
    s.z = {d1plus_ * tau, d1minus_ * tau};
    s.d1plus = d1plus_;
    s.d1minus = d1minus_;
    s.eta = eta_;
    return s;
}

NullSeparation Uniform::null_separation(double tau1, double tau2) const {
    double dt = tau1 - tau2;
    return {d1plus_ * dt, d1minus_ * dt};
}

std::optional<double> Uniform::uniform_before() const {
    return std::numeric_limits<double>::infinity();
}

std::string Uniform::describe() const { return fmt("uniform(beta=%g)", beta_); }

// ------------------------------------------------------------- Hyperbolic

Hyperbolic::Hyperbolic(double alpha0, double tau0) : alpha0_(alpha0), tau0_(tau0) {
    if (!std::isfinite(alpha0)) throw DomainError("hyperbolic trajectory requires finite alpha0");
    if (std::isnan(tau0) || tau0 == std::numeric_limits<double>::infinity())
        throw DomainError("hyperbolic tau0 must be finite or -infinity");
}

double Hyperbolic::zplus_at(double tau) const {
    if (alpha0_ == 0.0) return tau;
    if (hyperbolic_at(tau)) return std::expm1(alpha0_ * tau) / alpha0_;
    return std::expm1(alpha0_ * tau0_) / alpha0_ + (tau - tau0_) * std::exp(alpha0_ * tau0_);
}

double Hyperbolic::zminus_at(double tau) const {
    if (alpha0_ == 0.0) return tau;
    if (hyperbolic_at(tau)) return -std::expm1(-alpha0_ * tau) / alpha0_;
    return -std::expm1(-alpha0_ * tau0_) / alpha0_ + (tau - tau0_) * std::exp(-alpha0_ * tau0_);
}

TrajectoryState Hyperbolic::state(double tau) const {
    require_finite_tau(tau);
    Jet4 etaj;
    if (alpha0_ != 0.0 && hyperbolic_at(tau)) {
        etaj = Jet4::variable(tau) * alpha0_;
    } else {
        etaj = Jet4(alpha0_ == 0.0 ? 0.0 : alpha0_ * tau0_);
    }
    return make_state(tau, etaj, zplus_at(tau), zminus_at(tau));
}

NullSeparation Hyperbolic::null_separation(double tau1, double tau2) const {
    if (tau1 == tau2) return {0.0, 0.0};
    if (alpha0_ == 0.0) return {tau1 - tau2, tau1 - tau2};
    bool flipped = tau1 < tau2;
    double lo = flipped ? tau1 : tau2;
    double hi = flipped ? tau2 : tau1;
    // Ordered pieces, split at the uniform/hyperbolic boundary; each piece is
    // exact in relative terms (expm1 forms).
    std::function<NullSeparation(double, double)> piece = [&](double l, double h) -> NullSeparation {
        if (l >= tau0_) {
            double e = std::expm1(alpha0_ * (h - l)) / alpha0_;
            return {std::exp(alpha0_ * l) * e, std::exp(-alpha0_ * h) * e};
        }
        if (h <= tau0_) {
            double dt = h - l;
            return {dt * std::exp(alpha0_ * tau0_), dt * std::exp(-alpha0_ * tau0_)};
        }
        NullSeparation a = piece(l, tau0_);
        NullSeparation b = piece(tau0_, h);
        return {a.dzplus + b.dzplus, a.dzminus + b.dzminus};
    };
    NullSeparation s = piece(lo, hi);
    if (flipped) return {-s.dzplus, -s.dzminus};
    return s;
}

std::vector<double> Hyperbolic::breakpoints() const {
    if (std::isfinite(tau0_)) return {tau0_};
    return {};
}

std::optional<double> Hyperbolic::uniform_before() const {
    if (std::isfinite(tau0_) && alpha0_ != 0.0) return tau0_;
    if (alpha0_ == 0.0) return std::numeric_limits<double>::infinity();
    return std::nullopt;
}

Smoothness Hyperbolic::smoothness() const {
    return std::isfinite(tau0_) && alpha0_ != 0.0 ? Smoothness::c1 : Smoothness::cinf;
}

std::string Hyperbolic::describe() const {
    return fmt("hyperbolic(alpha0=%g, tau0=%g)", alpha0_, tau0_);
}

// -------------------------------------------------- AntiderivativeCache

namespace detail {

AntiderivativeCache::AntiderivativeCache(std::function<double(double)> f, double anchor,
                                         double spacing)
    : f_(std::move(f)), anchor_(anchor), spacing_(spacing) {
    if (!(std::isfinite(anchor) && spacing > 0.0))
        throw ConfigError("antiderivative cache requires finite anchor and positive spacing");
}

long double AntiderivativeCache::subpanel_integral(double lo, double hi) const {
    const auto& r = gk::rule15;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    long double acc = 0.0L;
    for (int i = 0; i < 15; ++i) acc += static_cast<long double>(r.wk[i]) * f_(c + h * r.x[i]);
    return acc * h;
}

AntiderivativeCache::Segment AntiderivativeCache::build_segment(long long j,
                                                               long double f_start) const {
    double b0 = anchor_ + static_cast<double>(j) * spacing_;
    // Pick a fixed subpanel count from the integrand's variation so that the
    // evaluated antiderivative is a smooth function of tau inside the segment.
    double vmin = 0.0, vmax = 0.0, scale = 0.0;
    for (int i = 0; i <= 8; ++i) {
        double v = f_(b0 + spacing_ * i / 8.0);
        if (!std::isfinite(v)) throw DomainError("non-finite integrand in position quadrature");
        if (i == 0) vmin = vmax = v;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        scale = std::max(scale, std::abs(v));
    }
    double var = vmax - vmin;
    scale = std::max(scale, 1e-300);
    int n = var <= 0.05 * scale ? 1 : var <= 0.3 * scale ? 2 : var <= 1.5 * scale ? 4 : 8;
    Segment seg;
    seg.f_start = f_start;
    seg.subpanels = n;
    seg.prefix.resize(static_cast<std::size_t>(n));
    long double acc = 0.0L;
    for (int i = 0; i < n; ++i) {
        double lo = b0 + spacing_ * i / n;
        double hi = b0 + spacing_ * (i + 1) / n;
        acc += subpanel_integral(lo, hi);
        seg.prefix[static_cast<std::size_t>(i)] = acc;
    }
    return seg;
}

const AntiderivativeCache::Segment& AntiderivativeCache::segment_for(long long j) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (built_lo_ > built_hi_) {
        segments_.emplace(0, build_segment(0, 0.0L));
        built_lo_ = built_hi_ = 0;
    }
    while (built_hi_ < j) {
        const Segment& prev = segments_.at(built_hi_);
        long double start = prev.f_start + prev.prefix.back();
        ++built_hi_;
        segments_.emplace(built_hi_, build_segment(built_hi_, start));
    }
    while (built_lo_ > j) {
        long double next_start = segments_.at(built_lo_).f_start;
        --built_lo_;
        Segment seg = build_segment(built_lo_, 0.0L);
        seg.f_start = next_start - seg.prefix.back();
        segments_.emplace(built_lo_, std::move(seg));
    }
    return segments_.at(j);
}

double AntiderivativeCache::eval(double tau) const {
    require_finite_tau(tau);
    double offset = (tau - anchor_) / spacing_;
    if (std::abs(offset) > 2e7) throw DomainError("tau too far from the quadrature anchor");
    long long j = static_cast<long long>(std::floor(offset));
    const Segment& seg = segment_for(j);
    double b0 = anchor_ + static_cast<double>(j) * spacing_;
    double sub = spacing_ / seg.subpanels;
    int i = std::min(static_cast<int>((tau - b0) / sub), seg.subpanels - 1);
    i = std::max(i, 0);
    long double partial = i > 0 ? seg.prefix[static_cast<std::size_t>(i) - 1] : 0.0L;
    double edge = b0 + sub * i;
    double gk = gk15_plain(f_, edge, tau);
    return static_cast<double>(seg.f_start + partial + static_cast<long double>(gk));
}

} // namespace detail

// ----------------------------------------------------- RapidityTrajectory

void RapidityTrajectory::init_position_caches(double anchor, double spacing) {
    zplus_ = std::make_unique<detail::AntiderivativeCache>(
        [this](double s) { return std::exp(eta_value(s)); }, anchor, spacing);
    zminus_ = std::make_unique<detail::AntiderivativeCache>(
        [this](double s) { return std::exp(-eta_value(s)); }, anchor, spacing);
}

TrajectoryState RapidityTrajectory::state(double tau) const {
    require_finite_tau(tau);
    return make_state(tau, eta_jet(tau), zplus_->eval(tau), zminus_->eval(tau));
}

NullSeparation RapidityTrajectory::null_separation(double tau1, double tau2) const {
    if (tau1 == tau2) return {0.0, 0.0};
    double lo = std::min(tau1, tau2), hi = std::max(tau1, tau2);
    double sign = tau1 > tau2 ? 1.0 : -1.0;
    if (hi - lo <= kNullDirectThreshold) {
        // Direct quadrature of the positive integrands e^{+-eta} keeps the
        // difference relatively accurate at small separations.
        double dzp = integrate_interval([this](double s) { return std::exp(eta_value(s)); }, lo,
                                        hi, tight_spec())
                         .value;
        double dzm = integrate_interval([this](double s) { return std::exp(-eta_value(s)); }, lo,
                                        hi, tight_spec())
                         .value;
        return {sign * dzp, sign * dzm};
    }
    double dzp = zplus_->eval(hi) - zplus_->eval(lo);
    double dzm = zminus_->eval(hi) - zminus_->eval(lo);
    return {sign * dzp, sign * dzm};
}

// ------------------------------------------------------------ smoothstep

namespace {

/// C-infinity unit step s(x): 0 for x <= 0, 1 for x >= 1, built from
/// f(x) = e^{-1/x}. The plateaus are reached to double precision well inside
/// 0.01 of the ends, where the jets are clamped to exact constants.
template <typename T>
T smoothstep(const T& x) {
    using std::exp;
    T fx = exp(T(-1.0) / x);
    T f1 = exp(T(-1.0) / (T(1.0) - x));
    return fx / (fx + f1);
}

} // namespace

// ---------------------------------------------------------- VelocityStep

VelocityStep::VelocityStep(double beta_i, double beta_f, double width)
    : beta_i_(beta_i), beta_f_(beta_f), width_(width) {
    if (!(std::isfinite(beta_i) && std::abs(beta_i) < 1.0 && std::isfinite(beta_f) &&
          std::abs(beta_f) < 1.0))
        throw DomainError("velocity step requires |beta| < 1");
    if (!(std::isfinite(width) && width >= 0.0))
        throw DomainError("velocity step requires width >= 0");
    eta_i_ = std::atanh(beta_i);
    eta_f_ = std::atanh(beta_f);
    if (width_ > 0.0) init_position_caches(0.0, std::min(0.5, width_ / 2.0));
}

Jet4 VelocityStep::eta_jet(double tau) const {
    if (width_ == 0.0) return Jet4(tau < 0.0 ? eta_i_ : eta_f_);
    double x = tau / width_;
    if (x <= 0.01) return Jet4(eta_i_);
    if (x >= 0.99) return Jet4(eta_f_);
    Jet4 xj;
    xj.c[0] = x;
    xj.c[1] = 1.0 / width_;
    return Jet4(eta_i_) + (eta_f_ - eta_i_) * smoothstep(xj);
}

double VelocityStep::eta_value(double tau) const {
    if (width_ == 0.0) return tau < 0.0 ? eta_i_ : eta_f_;
    double x = tau / width_;
    if (x <= 0.01) return eta_i_;
    if (x >= 0.99) return eta_f_;
    return eta_i_ + (eta_f_ - eta_i_) * smoothstep(x);
}

TrajectoryState VelocityStep::state(double tau) const {
    if (width_ > 0.0) return RapidityTrajectory::state(tau);
    require_finite_tau(tau);
    // Sharp step: uniform on both sides, state at tau = 0 reports the
    // post-jump side.
    double eta = tau < 0.0 ? eta_i_ : eta_f_;
    double d1p = std::exp(eta);
    TrajectoryState s;
    s.tau = tau;
    s.d1plus = d1p;
    s.d1minus = 1.0 / d1p;
    s.z = {s.d1plus * tau, s.d1minus * tau};
    s.eta = eta;
    return s;
}

NullSeparation VelocityStep::null_separation(double tau1, double tau2) const {
    if (width_ > 0.0) return RapidityTrajectory::null_separation(tau1, tau2);
    auto z = [&](double tau) -> WorldlinePoint {
        double eta = tau < 0.0 ? eta_i_ : eta_f_;
        double d1p = std::exp(eta);
        return {d1p * tau, tau / d1p};
    };
    if (tau1 == tau2) return {0.0, 0.0};
    if ((tau1 < 0.0) == (tau2 < 0.0)) {
        // Same side: exact linear difference avoids cancellation.
        double eta = tau1 < 0.0 ? eta_i_ : eta_f_;
        double d1p = std::exp(eta);
        double dt = tau1 - tau2;
        return {d1p * dt, dt / d1p};
    }
    WorldlinePoint z1 = z(tau1), z2 = z(tau2);
    return {z1.zplus - z2.zplus, z1.zminus - z2.zminus};
}

std::vector<double> VelocityStep::breakpoints() const {
    if (width_ == 0.0) return {0.0};
    return {};
}

std::optional<double> VelocityStep::uniform_before() const { return 0.0; }

Smoothness VelocityStep::smoothness() const {
    return width_ == 0.0 ? Smoothness::c0 : Smoothness::cinf;
}

std::string VelocityStep::describe() const {
    return fmt("velocity_step(beta_i=%g, beta_f=%g, width=%g)", beta_i_, beta_f_, width_);
}

// ------------------------------------------------------ HyperbolicSmooth

HyperbolicSmooth::HyperbolicSmooth(double alpha0, double tau0, double width)
    : alpha0_(alpha0), tau0_(tau0), width_(width) {
    if (!(std::isfinite(alpha0) && std::isfinite(tau0)))
        throw DomainError("smooth hyperbolic requires finite alpha0 and tau0");
    if (!(std::isfinite(width) && width > 0.0))
        throw DomainError("smooth hyperbolic requires width > 0");
    init_position_caches(tau0, std::min(0.5, width_ / 2.0));
}

Jet4 HyperbolicSmooth::eta_jet(double tau) const {
    double x = (tau - tau0_) / width_;
    if (x <= 0.01) return Jet4(0.0);
    if (x >= 0.99) {
        // Exactly hyperbolic: eta = alpha0 (tau - tau0).
        Jet4 etaj;
        etaj.c[0] = alpha0_ * (tau - tau0_);
        etaj.c[1] = alpha0_;
        return etaj;
    }
    Jet4 xj;
    xj.c[0] = x;
    xj.c[1] = 1.0 / width_;
    return (alpha0_ * width_) * (xj * smoothstep(xj));
}

double HyperbolicSmooth::eta_value(double tau) const {
    double x = (tau - tau0_) / width_;
    if (x <= 0.01) return 0.0;
    if (x >= 0.99) return alpha0_ * (tau - tau0_);
    return alpha0_ * width_ * x * smoothstep(x);
}

std::optional<double> HyperbolicSmooth::uniform_before() const { return tau0_; }

std::string HyperbolicSmooth::describe() const {
    return fmt("hyperbolic_smooth(alpha0=%g, tau0=%g, width=%g)", alpha0_, tau0_, width_);
}

// ------------------------------------------------------- RapidityProfile

RapidityProfile::RapidityProfile(ProfileSpec spec, double tau_ref)
    : spec_(std::move(spec)), tau_ref_(tau_ref) {
    if (!std::isfinite(tau_ref)) throw ConfigError("profile reference time must be finite");
    for (const ExprNode& n : spec_.expr.nodes())
        if (n.kind == NodeKind::Call && n.func == Func::Abs) has_abs_ = true;
    if (spec_.kind == ProfileKind::Alpha) {
        eta_integral_ = std::make_unique<detail::AntiderivativeCache>(
            [e = &spec_.expr](double s) { return e->eval(s); }, tau_ref_, 0.5);
    }
    init_position_caches(tau_ref_, 0.5);
}

Jet4 RapidityProfile::eta_jet(double tau) const {
    if (spec_.kind == ProfileKind::Eta) return spec_.expr.eval(Jet4::variable(tau));
    Jet4 alpha = spec_.expr.eval(Jet4::variable(tau));
    Jet4 etaj;
    etaj.c[0] = eta_integral_->eval(tau);
    for (std::size_t k = 1; k <= 4; ++k) etaj.c[k] = alpha.c[k - 1] / static_cast<double>(k);
    return etaj;
}

double RapidityProfile::eta_value(double tau) const {
    if (spec_.kind == ProfileKind::Eta) return spec_.expr.eval(tau);
    return eta_integral_->eval(tau);
}

Smoothness RapidityProfile::smoothness() const {
    return has_abs_ ? Smoothness::c0 : Smoothness::cinf;
}

std::string RapidityProfile::describe() const {
    return (spec_.kind == ProfileKind::Eta ? "eta = " : "alpha = ") + spec_.expr.print();
}

// -------------------------------------------------- FrozenPastTrajectory

FrozenPastTrajectory::FrozenPastTrajectory(std::shared_ptr<const Trajectory> inner,
                                           double tau_freeze)
    : inner_(std::move(inner)), tau_freeze_(tau_freeze) {
    if (!inner_) throw ConfigError("frozen past wrapper requires a trajectory");
    require_finite_tau(tau_freeze);
    frozen_ = inner_->state(tau_freeze);
}

TrajectoryState FrozenPastTrajectory::state(double tau) const {
    require_finite_tau(tau);
    if (tau >= tau_freeze_) return inner_->state(tau);
    TrajectoryState s;
    s.tau = tau;
    s.d1plus = frozen_.d1plus;
    s.d1minus = frozen_.d1minus;
    s.eta = frozen_.eta;
    double dt = tau - tau_freeze_;
    s.z = {frozen_.z.zplus + frozen_.d1plus * dt, frozen_.z.zminus + frozen_.d1minus * dt};
    return s;
}

NullSeparation FrozenPastTrajectory::null_separation(double tau1, double tau2) const {
    if (tau1 == tau2) return {0.0, 0.0};
    bool flipped = tau1 < tau2;
    double lo = flipped ? tau1 : tau2;
    double hi = flipped ? tau2 : tau1;
    NullSeparation s;
    if (lo >= tau_freeze_) {
        s = inner_->null_separation(hi, lo);
    } else if (hi <= tau_freeze_) {
        double dt = hi - lo;
        s = {frozen_.d1plus * dt, frozen_.d1minus * dt};
    } else {
        NullSeparation a = inner_->null_separation(hi, tau_freeze_);
        double dt = tau_freeze_ - lo;
        s = {a.dzplus + frozen_.d1plus * dt, a.dzminus + frozen_.d1minus * dt};
    }
    if (flipped) return {-s.dzplus, -s.dzminus};
    return s;
}

std::vector<double> FrozenPastTrajectory::breakpoints() const {
    std::vector<double> out{tau_freeze_};
    for (double b : inner_->breakpoints())
        if (b > tau_freeze_) out.push_back(b);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> FrozenPastTrajectory::uniform_before() const {
    std::optional<double> inner_ub = inner_->uniform_before();
    if (inner_ub && *inner_ub > tau_freeze_) return *inner_ub;
    return tau_freeze_;
}

Smoothness FrozenPastTrajectory::smoothness() const {
    Smoothness inner = inner_->smoothness();
    return inner == Smoothness::c0 ? Smoothness::c0 : Smoothness::c1;
}

bool FrozenPastTrajectory::exact_separation() const { return inner_->exact_separation(); }

std::string FrozenPastTrajectory::describe() const {
    return "frozen_past(" + inner_->describe() + fmt(", tau_freeze=%g)", tau_freeze_);
}

// --------------------------------------------------------------- rescale

namespace {

class RescaledTrajectory final : public Trajectory {
  public:
    RescaledTrajectory(std::shared_ptr<const Trajectory> inner, double lambda)
        : inner_(std::move(inner)), lambda_(lambda) {}

    TrajectoryState state(double tau) const override {
        TrajectoryState s = inner_->state(tau / lambda_);
        TrajectoryState out = s;
        out.tau = tau;
        out.z = {lambda_ * s.z.zplus, lambda_ * s.z.zminus};
        out.d2plus = s.d2plus / lambda_;
        out.d2minus = s.d2minus / lambda_;
        double l2 = lambda_ * lambda_;
        out.d3plus = s.d3plus / l2;
        out.d3minus = s.d3minus / l2;
        out.d4plus = s.d4plus / (l2 * lambda_);
        out.d4minus = s.d4minus / (l2 * lambda_);
        out.alpha = s.alpha / lambda_;
        return out;
    }

    NullSeparation null_separation(double tau1, double tau2) const override {
        NullSeparation s = inner_->null_separation(tau1 / lambda_, tau2 / lambda_);
        return {lambda_ * s.dzplus, lambda_ * s.dzminus};
    }

    std::vector<double> breakpoints() const override {
        std::vector<double> out = inner_->breakpoints();
        for (double& b : out) b *= lambda_;
        return out;
    }

    std::optional<double> uniform_before() const override {
        std::optional<double> ub = inner_->uniform_before();
        if (ub) return *ub * lambda_;
        return std::nullopt;
    }

    Smoothness smoothness() const override { return inner_->smoothness(); }
    bool exact_separation() const override { return inner_->exact_separation(); }

    std::string describe() const override {
        return "rescaled(" + inner_->describe() + fmt(", lambda=%g)", lambda_);
    }

  private:
    std::shared_ptr<const Trajectory> inner_;
    double lambda_;
};

} // namespace

std::shared_ptr<const Trajectory> rescale(std::shared_ptr<const Trajectory> traj, double lambda) {
    if (!traj) throw ConfigError("rescale requires a trajectory");
    if (!(std::isfinite(lambda) && lambda > 0.0)) throw DomainError("rescale requires lambda > 0");
    if (lambda == 1.0) return traj;
    return std::make_shared<RescaledTrajectory>(std::move(traj), lambda);
}

// ------------------------------------------------------- TrajectoryCache

const TrajectoryState& TrajectoryCache::state(double tau) {
    std::uint64_t key = std::bit_cast<std::uint64_t>(tau);
    auto it = memo_.find(key);
    if (it == memo_.end()) it = memo_.emplace(key, traj_->state(tau)).first;
    return it->second;
}

NullSeparation TrajectoryCache::null_separation(double tau1, double tau2) {
    if (exact_ || std::abs(tau1 - tau2) <= kNullDirectThreshold)
        return traj_->null_separation(tau1, tau2);
    const TrajectoryState& s1 = state(tau1);
    const TrajectoryState& s2 = state(tau2);
    return {s1.z.zplus - s2.z.zplus, s1.z.zminus - s2.z.zminus};
}

bool TrajectoryCache::interval_hits_breakpoint(double tau1, double tau2) const {
    if (breakpoints_.empty()) return false;
    double lo = std::min(tau1, tau2);
    double hi = std::max(tau1, tau2);
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), lo);
    return it != breakpoints_.end() && *it <= hi;
}

} // namespace mirrorshift
