#ifndef VPFP_VPFP_SYSTEM_HPP
#define VPFP_VPFP_SYSTEM_HPP

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "vpfp/dg_field.hpp"
#include "vpfp/mesh.hpp"
#include "vpfp/poisson.hpp"
#include "vpfp/transport.hpp"

namespace vpfp {

/// Physical and discretization parameters of the truncated Hermite system.
struct ModelParams {
  double T0 = 1.0;
  double tau0 = 10.0;
  double rho_inf = 1.0;
  int NH = 64;     // highest retained Hermite mode
  int degree = 1;  // DG polynomial degree m
  MeshPtr mesh;

  void validate() const;
};

/// The phase-space unknown: Hermite modes (D_0, ..., D_NH), each a DGField
/// on a shared mesh. The closure D_{NH+1} = 0 is implicit.
class HermiteState {
public:
  HermiteState(MeshPtr mesh, int degree, int NH);

  int NH() const { return static_cast<int>(modes_.size()) - 1; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  DGField& mode(int k) { return modes_[k]; }
  const DGField& mode(int k) const { return modes_[k]; }
  const Mesh1D& mesh() const { return modes_.front().mesh(); }
  const MeshPtr& mesh_ptr() const { return modes_.front().mesh_ptr(); }
  int degree() const { return modes_.front().degree(); }

  int flat_size() const { return num_modes() * modes_.front().size(); }
  void to_flat(Eigen::VectorXd& out) const;
  void from_flat(const Eigen::VectorXd& in);

  double l2_norm() const;

  HermiteState& operator+=(const HermiteState& other);
  HermiteState& operator-=(const HermiteState& other);
  HermiteState& operator*=(double factor);

private:
  std::vector<DGField> modes_;
};

/// Assembled semi-discrete Vlasov-Poisson-Fokker-Planck system: transport
/// operators, the chosen Poisson solver, and the Hermite right-hand sides.
class VpfpSystem {
public:
  VpfpSystem(ModelParams params, Flux transport_flux, PoissonMethod method,
             Flux ldg_flux = Flux::minus_plus);

  const ModelParams& params() const { return params_; }
  const TransportOperator& transport() const { return transport_; }
  PoissonMethod poisson_method() const { return method_; }
  Flux ldg_flux() const { return ldg_flux_; }
  const LdgPoissonOperator* ldg() const { return ldg_ ? ldg_.get() : nullptr; }
  const RtPoissonOperator* rt() const { return rt_ ? rt_.get() : nullptr; }

  HermiteState equilibrium_state() const;
  /// Landau initial data (1 + delta cos(2 pi x / L)) M(v): only D_0 is set.
  HermiteState initial_condition_landau(double delta) const;

  /// D_0 - rho_inf as a DGField (the charge deviation).
  DGField charge_deviation(const HermiteState& state) const;
  ElectricSolution solve_poisson(const DGField& rho_dev) const;

  struct RhsResult {
    HermiteState derivative;
    ElectricSolution field;
  };
  RhsResult rhs_nonlinear(const HermiteState& state) const;
  RhsResult rhs_linearized(const HermiteState& state) const;
  /// include_collision = false drops the -k D_k / tau0 relaxation terms
  /// (the sub-flow handled exactly by the splitting).
  RhsResult rhs(const HermiteState& state, bool linearized, bool include_collision) const;
  /// Only the field-coupling terms (the A phi contribution and, unless
  /// linearized, the projected E D products); transport and collision excluded.
  RhsResult field_source(const HermiteState& state, bool linearized) const;

  /// Pi_h(E D): exact L2 projection of the pointwise product.
  DGField nonlinear_term(const DGField& e_field, const DGField& d) const;

  /// f_h(x, v) = sum_k D_k(x) H_k(v / sqrt(T0)) M(v).
  double reconstruct_f(const HermiteState& state, double x, double v) const;
  /// Phase-space samples on the tensor grid xs x vs; rows follow xs.
  Eigen::MatrixXd reconstruct_f_grid(const HermiteState& state,
                                     const std::vector<double>& xs,
                                     const std::vector<double>& vs) const;

private:
  void check_state(const HermiteState& state) const;

  ModelParams params_;
  PoissonMethod method_;
  Flux ldg_flux_;
  TransportOperator transport_;
  std::unique_ptr<LdgPoissonOperator> ldg_;
  std::unique_ptr<RtPoissonOperator> rt_;
  BasisTable table_m_;   // degree m at the module-wide rule
  BasisTable table_e_;   // degree m+1 at the same nodes (RT fields)
};

/// Deterministic randomized admissible state: D_0 = rho_inf + zero-mean
/// noise, all higher modes noisy, coefficients O(amplitude).
HermiteState random_state(const VpfpSystem& system, std::uint64_t seed, double amplitude);

/// Flat (mode, cell, index, coefficient) rows with a header carrying
/// Nx, m, NH, L.
void write_csv(std::ostream& os, const HermiteState& state);

}  // namespace vpfp

#endif
