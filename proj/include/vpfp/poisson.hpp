#ifndef VPFP_POISSON_HPP
#define VPFP_POISSON_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "vpfp/dg_field.hpp"
#include "vpfp/transport.hpp"

namespace vpfp {

enum class PoissonMethod { ldg, rt };

/// Discrete Poisson solution (E_h, Phi_h). E is a degree-m field for the
/// LDG method and a continuous degree-(m+1) field for Raviart-Thomas;
/// Phi has zero mean in both cases.
struct ElectricSolution {
  DGField E;
  DGField phi;
  PoissonMethod method = PoissonMethod::ldg;
  double residual_primal = 0.0;  // first equation, <E,w> = -b(phi,w)
  double residual_dual = 0.0;    // second equation, -b*(E,v) = <rho_dev,v>
};

/// Local discontinuous Galerkin Poisson solve: B_h = a_h-style assembly
/// with unit prefactor, E eliminated through the identity mass matrix, and
/// the composed SPD system B*B phi = rho_dev factorized once on the
/// zero-mean subspace.
class LdgPoissonOperator {
public:
  LdgPoissonOperator(MeshPtr mesh, int degree, Flux flux);

  const Mesh1D& mesh() const { return ops_.mesh(); }
  int degree() const { return ops_.degree(); }
  Flux flux() const { return ops_.flux(); }

  DGField apply_B(const DGField& v) const { return ops_.apply(v); }
  DGField apply_B_star(const DGField& w) const { return ops_.apply_star(w); }

  ElectricSolution solve(const DGField& rho_dev) const;

private:
  TransportOperator ops_;  // T0 = 1: b_h shares the a_h flux structure
  Eigen::LDLT<Eigen::MatrixXd> factorization_;
  Eigen::MatrixXd normal_;
  Eigen::VectorXd mean_direction_;
};

/// Raviart-Thomas mixed solve on W_h = continuous periodic degree-(m+1)
/// polynomials. E is the zero-mean continuous antiderivative of rho_dev
/// (so B*E = -dE/dx = -rho_dev holds cellwise exactly); Phi is recovered
/// from the first equation through antiderivative test functions.
class RtPoissonOperator {
public:
  RtPoissonOperator(MeshPtr mesh, int degree);

  const Mesh1D& mesh() const { return *mesh_; }
  int degree() const { return degree_; }

  ElectricSolution solve(const DGField& rho_dev) const;

  /// -d/dx of a continuous degree-(m+1) field, exact in U_h^m.
  DGField apply_B_star(const DGField& e_field) const;

  /// Nodal basis of W_h (interface hats + cell bubbles) represented as
  /// degree-(m+1) DG fields; size Nx*(m+1).
  std::vector<DGField> wh_basis() const;

private:
  MeshPtr mesh_;
  int degree_;
};

/// b_h(phi, w) = -sum_j (phi, dw/dx)_{K_j} for the Raviart-Thomas pairing.
double rt_b_form(const DGField& phi, const DGField& w);

/// ||E||_Linf / ||rho_dev||_L2 with the max taken over dense per-cell
/// Chebyshev sampling.
double electric_linf_ratio(const ElectricSolution& sol, const DGField& rho_dev);

}  // namespace vpfp

#endif
