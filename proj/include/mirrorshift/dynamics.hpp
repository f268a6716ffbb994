#pragma once

#include <memory>
#include <vector>

#include "mirrorshift/massshift.hpp"
#include "mirrorshift/trajectory.hpp"

namespace mirrorshift {

/// Free backreaction evolution: the mirror's rapidity and total mass respond
/// to the flux functionals of its own past, m eta_dot = F+ - F- and
/// m_dot = -(F+ + F-).
struct DynamicsConfig {
    double bare_mass = 1.0;
    Coupling coupling;
    /// Prescribed history (uniform or a kick profile) for tau <= tau_start.
    std::shared_ptr<const Trajectory> past;
    double tau_start = 0.0;
    /// Substep; must resolve the memory kernel, dtau <= 0.1 / a.
    double dtau = 0.05;
    QuadratureSpec quad;

    void validate() const;
};

struct DynamicsSample {
    double tau = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    double m_total = 0.0;
    double mu = 0.0;
    double m_dot = 0.0;
    double flux_plus = 0.0;
    double flux_minus = 0.0;
    WorldlinePoint z;
    double err = 0.0;
    bool converged = true;
};

enum class HaltReason { Completed, NegativeMass, QuadratureFailure };

struct DynamicsResult {
    std::vector<DynamicsSample> samples;
    HaltReason halt = HaltReason::Completed;
    /// The evolved worldline (prescribed past plus computed nodes), usable
    /// with every kernel and mass-shift routine.
    std::shared_ptr<const Trajectory> trajectory;
};

struct Rates {
    double eta_dot = 0.0;
    double m_dot = 0.0;
    double flux_plus = 0.0;
    double flux_minus = 0.0;
    double err = 0.0;
    bool converged = true;
};

/// Worldline assembled from a prescribed past and Hermite-interpolated
/// (eta, eta_dot) nodes on a fixed substep grid. Null positions advance by
/// Gauss-Legendre integration of e^{+-eta} over each cell, so the
/// normalization of the velocity vector is exact by construction.
class HistoryTrajectory : public Trajectory {
  public:
    HistoryTrajectory(std::shared_ptr<const Trajectory> past, double tau_start, double dtau);

    void append(double eta, double eta_dot);
    void replace_last(double eta, double eta_dot);
    void pop();
    double end_tau() const { return tau_start_ + dtau_ * static_cast<double>(nodes_.size() - 1); }
    std::size_t node_count() const { return nodes_.size(); }

    TrajectoryState state(double tau) const override;
    NullSeparation null_separation(double tau1, double tau2) const override;
    std::vector<double> breakpoints() const override;
    std::optional<double> uniform_before() const override;
    Smoothness smoothness() const override { return Smoothness::c1; }
    std::string describe() const override;

  private:
    struct Node {
        double eta;
        double eta_dot;
        WorldlinePoint z;
    };

    Jet4 eta_jet(double tau) const;
    void recompute_z(std::size_t i);

    std::shared_ptr<const Trajectory> past_;
    double tau_start_;
    double dtau_;
    std::vector<Node> nodes_;
};

/// Flux functionals of the history at its endpoint, turned into rates for
/// (eta, m_total). Reports the negative-mass pathology via DomainError.
Rates derive_rates(const Trajectory& history, double tau, double m_total, const Coupling& c,
                   const QuadratureSpec& spec);

/// Predictor-corrector (trapezoidal, one corrector pass) evolution from
/// tau_start to tau_end. The initial total mass is bare_mass + mu(tau_start)
/// evaluated on the prescribed past.
DynamicsResult evolve(const DynamicsConfig& config, double tau_end);

} // namespace mirrorshift
