#ifndef VPFP_HARNESS_HPP
#define VPFP_HARNESS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vpfp/config.hpp"
#include "vpfp/diagnostics.hpp"

namespace vpfp {

struct NormTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// eps_h^p = (sum_k ||D_{h,k} - D_{h/2,k}||_p^2)^(1/2): both states sampled
/// pointwise on the finer run's quadrature grid, shared modes differenced,
/// the finer run's extra modes included as-is.
NormTriple cross_resolution_error(const HermiteState& coarse, const HermiteState& fine);

struct RunArtifacts {
  std::vector<DiagnosticsRecord> series;
  HermiteState final_state;
  std::vector<std::string> files;
};

/// Time-series CSV, final-state snapshot, and phase-space slices at the
/// configured snapshot times, all under config.output.dir.
RunArtifacts run_single(const RunConfig& config);

struct ConvergencePair {
  int nx_coarse = 0, nh_coarse = 0;
  int nx_fine = 0, nh_fine = 0;
  NormTriple error;
  std::optional<NormTriple> order;  // log2(previous error / this error)
};

struct ConvergenceReport {
  double tau0 = 0.0;
  std::vector<ConvergencePair> pairs;
  std::string to_json() const;
};

ConvergenceReport run_convergence_study(const RunConfig& config);

struct RegimeResult {
  double tau0 = 0.0;
  std::vector<DiagnosticsRecord> series;
  std::optional<RateFit> energy_rate;  // absent when the fit window is unusable
  std::optional<RateFit> field_rate;
};

std::vector<RegimeResult> run_regime_sweep(const RunConfig& config);

struct InvariantCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct BatteryReport {
  std::vector<InvariantCheck> checks;
  bool all_pass() const;
};

/// Randomized invariant suites of every module: operator identities,
/// energy/conservation laws, elliptic regularity, entropy equivalence.
BatteryReport run_invariant_battery(const RunConfig& config);

void print_battery(std::ostream& os, const BatteryReport& report);

}  // namespace vpfp

#endif
