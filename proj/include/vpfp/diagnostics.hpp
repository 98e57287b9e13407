#ifndef VPFP_DIAGNOSTICS_HPP
#define VPFP_DIAGNOSTICS_HPP

#include <iosfwd>
#include <vector>

#include "vpfp/vpfp_system.hpp"

namespace vpfp {

/// One time sample of every monitored functional. CSV column order is the
/// declaration order below.
struct DiagnosticsRecord {
  double t = 0.0;
  double energy_E = 0.0;       // (1/2 rho_inf) sum ||D_k - D_inf,k||^2 + ||E||^2 / (2 T0)
  double dissipation_I = 0.0;  // (1/rho_inf) sum k ||D_k - D_inf,k||^2
  double entropy_H = 0.0;      // energy - (alpha0/rho_inf) <D_1, F>
  double alpha0 = 0.0;
  double mass_m0 = 0.0;
  double momentum_m1 = 0.0;
  double kinetic_K = 0.0;
  double total_W = 0.0;
  double dist_f_finf = 0.0;
  double dist_rho_rhoinf = 0.0;
  double dist_f_localmax = 0.0;
  double norm_E = 0.0;
};

double energy_functional(const HermiteState& state, const ElectricSolution& field,
                         const ModelParams& params);
double dissipation_functional(const HermiteState& state, const ModelParams& params);

/// H = E - (alpha0/rho_inf) <D_1, F_h> with F_h from the auxiliary elliptic
/// lift of D_0 - rho_inf.
double modified_entropy(const HermiteState& state, const ElectricSolution& field,
                        const VpfpSystem& system, double alpha0);

struct PhysicalInvariants {
  double m0 = 0.0;
  double m1 = 0.0;
  double K = 0.0;
  double W = 0.0;
  bool kinetic_complete = true;  // false when NH < 2 truncates K
};
PhysicalInvariants physical_invariants(const HermiteState& state,
                                       const ElectricSolution& field,
                                       const ModelParams& params);

struct RateFit {
  double rate = 0.0;  // positive = decay
  double residual = 0.0;
  int samples = 0;
};

/// Least-squares slope of log(energy_E) over t in [t_begin, t_end].
/// Requires at least 10 samples, all with positive energy.
RateFit decay_rate_fit(const std::vector<DiagnosticsRecord>& series, double t_begin,
                       double t_end);

/// Largest alpha0 in the geometric sweep 2^-1 ... 2^-20 for which the
/// entropy equivalence band E/2 <= H <= 3E/2 holds (with margin) on
/// randomized admissible states.
double calibrate_alpha0(const VpfpSystem& system, int num_states, std::uint64_t seed);

DiagnosticsRecord compute_record(const VpfpSystem& system, const HermiteState& state,
                                 double t, double alpha0);

void write_csv_header(std::ostream& os, const std::string& fingerprint);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& record);

}  // namespace vpfp

#endif
