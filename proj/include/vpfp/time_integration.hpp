#ifndef VPFP_TIME_INTEGRATION_HPP
#define VPFP_TIME_INTEGRATION_HPP

#include <Eigen/Core>
#include <functional>

#include "vpfp/vpfp_system.hpp"

namespace vpfp {

/// Split-DIRK2 stepper knobs. The filter defaults are the Hou-Li values
/// sigma(eta) = exp(-36 eta^36) beyond the 2/3 dealiasing cut.
struct TimeStepperConfig {
  double dt = 0.1;
  double picard_tol = 1e-12;
  int picard_max_iters = 50;
  bool filter_enabled = true;
  double filter_alpha = 36.0;
  int filter_order = 36;
  double filter_cut = 2.0 / 3.0;
  bool filter_hard_cut = false;  // zero (instead of damp) modes past the cut
  bool linearized = false;       // drop the projected nonlinear terms

  void validate() const;
};

using Observer = std::function<void(int step, double t, const HermiteState&)>;

/// Strang composition per step: exact collision half-step, two-stage
/// stiffly accurate DIRK2 (gamma = 1 - sqrt(2)/2) on the collisionless
/// transport-field system with Picard-frozen field terms, collision
/// half-step, Hou-Li filter.
class TimeIntegrator {
public:
  TimeIntegrator(const VpfpSystem& system, TimeStepperConfig config);

  const TimeStepperConfig& config() const { return config_; }

  /// D_k <- exp(-k dt_half / tau0) D_k, the exact collision sub-flow.
  HermiteState collision_half_step(const HermiteState& state, double dt_half) const;

  /// One DIRK2 step of the collisionless system (collision terms removed).
  HermiteState transport_field_dirk2_step(const HermiteState& state, double dt) const;

  HermiteState hou_li_filter(const HermiteState& state) const;

  /// Full Strang step at the configured dt (or the supplied one).
  HermiteState step(const HermiteState& state, double dt) const;

  /// Advance to t_end; the observer (if any) fires at t = 0, every
  /// `stride` steps, and at the final step.
  HermiteState run(const HermiteState& initial, double t_end, int stride = 1,
                   const Observer& observer = {}) const;

  /// Statistics of the most recent step (Picard iterations, CG iterations).
  struct SolveStats {
    int picard_iterations = 0;
    int cg_iterations = 0;
  };
  SolveStats last_stats() const { return stats_; }

private:
  Eigen::VectorXd solve_stage(const Eigen::VectorXd& base, double a,
                              const Eigen::VectorXd& warm_start, HermiteState& work) const;

  const VpfpSystem& system_;
  TimeStepperConfig config_;
  double transport_norm_estimate_;
  mutable SolveStats stats_;
};

}  // namespace vpfp

#endif
