#ifndef VPFP_CONFIG_HPP
#define VPFP_CONFIG_HPP

#include <array>
#include <string>
#include <vector>

#include "vpfp/time_integration.hpp"
#include "vpfp/vpfp_system.hpp"

namespace vpfp {

/// Parse/serialization error with the offending key in the message.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { single_run, convergence_study, regime_sweep, invariant_battery };

/// Complete description of a run. Every field has a default (the Landau
/// damping setup of the strong-collision regime); parsing rejects unknown
/// keys and round-trips bit-identically through serialize().
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::single_run;

  struct Model {
    double T0 = 1.0;
    double tau0 = 10.0;
    double rho_inf = 1.0;
    int NH = 64;
    int m = 1;
    double L = 4.0 * M_PI;
    int Nx = 64;
    std::vector<double> nodes;  // optional explicit partition, overrides Nx
  } model;

  struct InitialCondition {
    std::string kind = "landau";  // landau | equilibrium
    double delta = 0.05;
  } ic;

  struct Transport {
    std::string flux = "minus_plus";  // minus_plus | plus_minus
  } transport;

  struct Poisson {
    std::string method = "ldg";          // ldg | rt
    std::string ldg_flux = "minus_plus";  // minus_plus | plus_minus
  } poisson;

  struct Time {
    double dt = 0.1;
    double t_end = 1.0;
    double picard_tol = 1e-12;
    int picard_max_iters = 50;
  } time;

  struct Filter {
    bool enabled = true;
    double alpha = 36.0;
    int order = 36;
    double cut = 2.0 / 3.0;
    bool hard_cut = false;
  } filter;

  struct Output {
    std::string dir = "out";
    int stride = 1;
    std::vector<double> snapshot_times;
    int phase_grid_nx = 256;
    int phase_grid_nv = 256;
    double vmax_factor = 6.0;
  } output;

  struct Diagnostics {
    double alpha0 = 0.015625;
    bool calibrate_alpha0 = false;
    int calibration_states = 40;
    std::uint64_t seed = 12345;
  } diagnostics;

  struct Convergence {
    std::vector<std::array<int, 2>> levels = {{64, 64}, {128, 128}, {256, 256}};
    double dt = 0.01;
  } convergence;

  struct Sweep {
    std::vector<double> tau0_list = {10.0, 1000.0, 100000.0};
  } sweep;

  struct Battery {
    std::uint64_t seed = 20240917;
    int trials = 25;
  } battery;

  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::string& path);
  std::string serialize() const;
  /// Deterministic FNV-1a hash of the canonical serialization.
  std::string fingerprint() const;

  /// Apply VPFP_SECTION_KEY=... environment overrides.
  void apply_env_overrides();

  void validate() const;

  MeshPtr make_mesh() const;
  ModelParams make_params(MeshPtr mesh) const;
  Flux transport_flux() const;
  PoissonMethod poisson_method() const;
  Flux ldg_flux() const;
  TimeStepperConfig make_time_config(bool linearized = false) const;

  bool operator==(const RunConfig& other) const {
    return serialize() == other.serialize();
  }
};

std::string experiment_name(ExperimentKind kind);

}  // namespace vpfp

#endif
