#include "mirrorshift/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mirrorshift/errors.hpp"

namespace mirrorshift {

namespace {

std::string dfmt(const char* pattern, double a, double b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

/// Cubic in cell-local time s, eta(s) = c0 + c1 s + c2 s^2 + c3 s^3.
struct Cubic {
    double c0, c1, c2, c3;

    double eval(double s) const { return ((c3 * s + c2) * s + c1) * s + c0; }
};

Cubic hermite(double eta0, double slope0, double eta1, double slope1, double h) {
    double d = (eta1 - eta0) / h;
    return {eta0, slope0, (3.0 * d - 2.0 * slope0 - slope1) / h,
            (slope0 + slope1 - 2.0 * d) / (h * h)};
}

/// Advances both null positions across [s0, s1] inside one cell by 5-point
/// Gauss-Legendre on e^{+-eta}; at tenth order over a substep the rule is
/// exact to rounding, so d1plus * d1minus = 1 is preserved by construction.
WorldlinePoint advance(WorldlinePoint z, const Cubic& cub, double s0, double s1) {
    static constexpr double xs[5] = {-0.90617984593866399, -0.53846931010568309, 0.0,
                                     0.53846931010568309, 0.90617984593866399};
    static constexpr double ws[5] = {0.23692688505618909, 0.47862867049936647,
                                     0.56888888888888889, 0.47862867049936647,
                                     0.23692688505618909};
    double c = 0.5 * (s0 + s1), h = 0.5 * (s1 - s0);
    double sp = 0.0, sm = 0.0;
    for (int i = 0; i < 5; ++i) {
        double eta = cub.eval(c + h * xs[i]);
        sp += ws[i] * std::exp(eta);
        sm += ws[i] * std::exp(-eta);
    }
    return {z.zplus + sp * h, z.zminus + sm * h};
}

std::size_t cell_index(double tau, double tau_start, double dtau, std::size_t node_count) {
    double x = (tau - tau_start) / dtau;
    double i = std::floor(x);
    if (i < 0.0) return 0;
    std::size_t last_cell = node_count - 2;
    std::size_t idx = static_cast<std::size_t>(i);
    return std::min(idx, last_cell);
}

} // namespace

void DynamicsConfig::validate() const {
    coupling.validate();
    if (!(bare_mass > 0.0)) throw ConfigError("bare mass must be positive");
    if (!past) throw ConfigError("dynamics needs a prescribed past trajectory");
    if (!(dtau > 0.0) || dtau > 0.1 / coupling.a)
        throw ConfigError("dtau must be positive and at most 0.1/a");
}

HistoryTrajectory::HistoryTrajectory(std::shared_ptr<const Trajectory> past, double tau_start,
                                     double dtau)
    : past_(std::move(past)), tau_start_(tau_start), dtau_(dtau) {
    if (!past_) throw ConfigError("history trajectory requires a past");
    if (!std::isfinite(tau_start_)) throw ConfigError("history trajectory requires finite tau_start");
    if (!(dtau_ > 0.0) || !std::isfinite(dtau_))
        throw ConfigError("history trajectory requires dtau > 0");
}

void HistoryTrajectory::append(double eta, double eta_dot) {
    nodes_.push_back({eta, eta_dot, {}});
    recompute_z(nodes_.size() - 1);
}

void HistoryTrajectory::replace_last(double eta, double eta_dot) {
    if (nodes_.empty()) throw DomainError("history trajectory has no node to replace");
    nodes_.back().eta = eta;
    nodes_.back().eta_dot = eta_dot;
    recompute_z(nodes_.size() - 1);
}

void HistoryTrajectory::pop() {
    if (nodes_.empty()) throw DomainError("history trajectory has no node to pop");
    nodes_.pop_back();
}

Jet4 HistoryTrajectory::eta_jet(double tau) const {
    if (nodes_.size() == 1) {
        Jet4 j;
        j.c[0] = nodes_[0].eta + nodes_[0].eta_dot * (tau - tau_start_);
        j.c[1] = nodes_[0].eta_dot;
        return j;
    }
    std::size_t i = cell_index(tau, tau_start_, dtau_, nodes_.size());
    Cubic cub = hermite(nodes_[i].eta, nodes_[i].eta_dot, nodes_[i + 1].eta,
                        nodes_[i + 1].eta_dot, dtau_);
    double s = tau - (tau_start_ + dtau_ * static_cast<double>(i));
    Jet4 j;
    j.c[0] = cub.eval(s);
    j.c[1] = (3.0 * cub.c3 * s + 2.0 * cub.c2) * s + cub.c1;
    j.c[2] = 3.0 * cub.c3 * s + cub.c2;
    j.c[3] = cub.c3;
    // c[4] stays zero: the interpolant carries derivatives through third
    // order only, and nothing downstream reads beyond that.
    return j;
}

void HistoryTrajectory::recompute_z(std::size_t i) {
    if (i == 0) {
        nodes_[0].z = past_->state(tau_start_).z;
        return;
    }
    Cubic cub = hermite(nodes_[i - 1].eta, nodes_[i - 1].eta_dot, nodes_[i].eta,
                        nodes_[i].eta_dot, dtau_);
    nodes_[i].z = advance(nodes_[i - 1].z, cub, 0.0, dtau_);
}

TrajectoryState HistoryTrajectory::state(double tau) const {
    if (tau < tau_start_ || nodes_.empty()) return past_->state(tau);
    double limit = end_tau();
    if (tau > limit + 1e-9 * std::max({std::abs(limit), dtau_, 1.0}))
        throw DomainError(dfmt("history state requested at tau=%.17g beyond end %.17g", tau, limit));

    WorldlinePoint z;
    if (nodes_.size() == 1) {
        z = nodes_.front().z;
    } else {
        std::size_t i = cell_index(tau, tau_start_, dtau_, nodes_.size());
        double t_i = tau_start_ + dtau_ * static_cast<double>(i);
        Cubic cub = hermite(nodes_[i].eta, nodes_[i].eta_dot, nodes_[i + 1].eta,
                            nodes_[i + 1].eta_dot, dtau_);
        z = advance(nodes_[i].z, cub, 0.0, tau - t_i);
    }
    return make_state(tau, eta_jet(tau), z.zplus, z.zminus);
}

NullSeparation HistoryTrajectory::null_separation(double tau1, double tau2) const {
    if (tau1 == tau2) return {0.0, 0.0};
    bool flipped = tau1 < tau2;
    double lo = flipped ? tau1 : tau2;
    double hi = flipped ? tau2 : tau1;

    // Forward separation across the node region, node z differences plus
    // partial-cell Gauss fragments so short intervals keep full relative
    // accuracy.
    auto segment = [&](double from, double to) -> NullSeparation {
        std::size_t ia = cell_index(from, tau_start_, dtau_, nodes_.size());
        std::size_t ib = cell_index(to, tau_start_, dtau_, nodes_.size());
        double ta = tau_start_ + dtau_ * static_cast<double>(ia);
        double tb = tau_start_ + dtau_ * static_cast<double>(ib);
        Cubic ca = hermite(nodes_[ia].eta, nodes_[ia].eta_dot, nodes_[ia + 1].eta,
                           nodes_[ia + 1].eta_dot, dtau_);
        if (ia == ib) {
            WorldlinePoint d = advance({}, ca, from - ta, to - ta);
            return {d.zplus, d.zminus};
        }
        Cubic cb = hermite(nodes_[ib].eta, nodes_[ib].eta_dot, nodes_[ib + 1].eta,
                           nodes_[ib + 1].eta_dot, dtau_);
        WorldlinePoint head = advance({}, ca, from - ta, dtau_);
        WorldlinePoint tail = advance({}, cb, 0.0, to - tb);
        double mid_p = nodes_[ib].z.zplus - nodes_[ia + 1].z.zplus;
        double mid_m = nodes_[ib].z.zminus - nodes_[ia + 1].z.zminus;
        return {head.zplus + mid_p + tail.zplus, head.zminus + mid_m + tail.zminus};
    };

    NullSeparation s;
    if (hi <= tau_start_ || nodes_.size() < 2) {
        s = past_->null_separation(hi, lo);
    } else if (lo < tau_start_) {
        NullSeparation p = past_->null_separation(tau_start_, lo);
        NullSeparation q = segment(tau_start_, hi);
        s = {p.dzplus + q.dzplus, p.dzminus + q.dzminus};
    } else {
        s = segment(lo, hi);
    }
    if (flipped) return {-s.dzplus, -s.dzminus};
    return s;
}

std::vector<double> HistoryTrajectory::breakpoints() const {
    std::vector<double> out;
    for (double b : past_->breakpoints())
        if (b < tau_start_) out.push_back(b);
    out.push_back(tau_start_);
    return out;
}

std::optional<double> HistoryTrajectory::uniform_before() const {
    std::optional<double> ub = past_->uniform_before();
    if (!ub) return std::nullopt;
    return std::min(*ub, tau_start_);
}

std::string HistoryTrajectory::describe() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, ", tau_start=%g, dtau=%g, nodes=%zu)", tau_start_, dtau_,
                  nodes_.size());
    return "dynamics_history(" + past_->describe() + buf;
}

Rates derive_rates(const Trajectory& history, double tau, double m_total, const Coupling& c,
                   const QuadratureSpec& spec) {
    c.validate();
    if (!(m_total > 0.0))
        throw DomainError(dfmt("total mass %.17g is not positive at tau=%.17g", m_total, tau));
    TrajectoryCache cache(history);
    FluxPair f = flux_pair(cache, tau, c, spec);
    Rates r;
    r.flux_plus = f.plus.value;
    r.flux_minus = f.minus.value;
    r.eta_dot = (f.plus.value - f.minus.value) / m_total;
    r.m_dot = -(f.plus.value + f.minus.value);
    r.err = f.plus.error_estimate + f.plus.tail_bound + f.minus.error_estimate +
            f.minus.tail_bound;
    r.converged = f.plus.converged && f.minus.converged;
    return r;
}

DynamicsResult evolve(const DynamicsConfig& config, double tau_end) {
    config.validate();
    if (!(tau_end > config.tau_start)) throw ConfigError("tau_end must lie beyond tau_start");
    long long steps = static_cast<long long>(
        std::ceil((tau_end - config.tau_start) / config.dtau - 1e-9));
    steps = std::max<long long>(steps, 1);

    auto history =
        std::make_shared<HistoryTrajectory>(config.past, config.tau_start, config.dtau);
    DynamicsResult out;
    out.trajectory = history;

    // Total mass starts at the bare mass plus the shift the prescribed past
    // has already accumulated; from here on only the flux balance moves it.
    TrajectoryCache past_cache(*config.past);
    IntegralResult mu_init = mu_total(past_cache, config.tau_start, config.coupling, config.quad);
    double m_total = config.bare_mass + mu_init.value;
    double err_acc = mu_init.error_estimate + mu_init.tail_bound;
    bool all_converged = mu_init.converged;
    if (!(m_total > 0.0)) {
        out.halt = HaltReason::NegativeMass;
        return out;
    }

    auto record = [&](double tau, double eta, const Rates& r, double m_tot) {
        DynamicsSample s;
        s.tau = tau;
        s.eta = eta;
        s.alpha = r.eta_dot;
        s.m_total = m_tot;
        s.mu = m_tot - config.bare_mass;
        s.m_dot = r.m_dot;
        s.flux_plus = r.flux_plus;
        s.flux_minus = r.flux_minus;
        s.z = history->state(tau).z;
        s.err = err_acc;
        s.converged = all_converged;
        out.samples.push_back(s);
    };

    // Junction node: the flux boundary term at tau_start belongs to the
    // past-side acceleration; once the initial rates are known the stored
    // slope switches to the equation of motion's right limit.
    TrajectoryState junction = config.past->state(config.tau_start);
    history->append(junction.eta, junction.alpha);
    Rates rates = derive_rates(*history, config.tau_start, m_total, config.coupling, config.quad);
    history->replace_last(junction.eta, rates.eta_dot);
    all_converged = all_converged && rates.converged;
    record(config.tau_start, junction.eta, rates, m_total);
    if (!rates.converged) {
        out.halt = HaltReason::QuadratureFailure;
        return out;
    }

    double eta_n = junction.eta;
    for (long long n = 0; n < steps; ++n) {
        double t1 = config.tau_start + config.dtau * static_cast<double>(n + 1);
        double eta_pred = eta_n + config.dtau * rates.eta_dot;
        double m_pred = m_total + config.dtau * rates.m_dot;
        if (!(m_pred > 0.0)) {
            out.halt = HaltReason::NegativeMass;
            break;
        }
        history->append(eta_pred, rates.eta_dot);
        Rates r1 = derive_rates(*history, t1, m_pred, config.coupling, config.quad);

        double eta_new = eta_n + 0.5 * config.dtau * (rates.eta_dot + r1.eta_dot);
        double m_new = m_total + 0.5 * config.dtau * (rates.m_dot + r1.m_dot);
        if (!(m_new > 0.0)) {
            history->pop();
            out.halt = HaltReason::NegativeMass;
            break;
        }
        history->replace_last(eta_new, r1.eta_dot);
        Rates r2 = derive_rates(*history, t1, m_new, config.coupling, config.quad);
        history->replace_last(eta_new, r2.eta_dot);

        err_acc += config.dtau * r2.err;
        all_converged = all_converged && r1.converged && r2.converged;
        eta_n = eta_new;
        m_total = m_new;
        rates = r2;
        record(t1, eta_new, r2, m_new);
        if (!r1.converged || !r2.converged) {
            out.halt = HaltReason::QuadratureFailure;
            break;
        }
    }
    return out;
}

} // namespace mirrorshift
