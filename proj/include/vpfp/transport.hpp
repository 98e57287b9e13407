#ifndef VPFP_TRANSPORT_HPP
#define VPFP_TRANSPORT_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <iosfwd>
#include <memory>

#include "vpfp/dg_field.hpp"
#include "vpfp/mesh.hpp"

namespace vpfp {

/// Alternating flux pair (g_a, g_a*): minus_plus = (u^-, u^+),
/// plus_minus = (u^+, u^-).
enum class Flux { minus_plus, plus_minus };

struct AuxiliaryEllipticSolution {
  DGField F;
  DGField Psi;  // zero mean
  double residual = 0.0;
};

/// Discrete transport operator A_h (a consistent approximation of
/// sqrt(T0) d/dx) together with its L2 adjoint A_h*, assembled once as
/// banded per-cell blocks in the orthonormal basis. The matrix of A_h* is
/// the transpose of the matrix of A_h, and A_h annihilates constants.
class TransportOperator {
public:
  TransportOperator(MeshPtr mesh, int degree, double T0, Flux flux);

  const Mesh1D& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  double T0() const { return T0_; }
  Flux flux() const { return flux_; }
  int dim() const { return mesh_->num_cells() * (degree_ + 1); }

  DGField apply(const DGField& u) const;       // A_h u
  DGField apply_star(const DGField& u) const;  // A_h* u

  /// out += scale * A_h u on raw coefficient arrays of length dim().
  void apply_scaled_add(const double* u, double* out, double scale) const;
  /// out += scale * A_h* u.
  void apply_star_scaled_add(const double* u, double* out, double scale) const;

  /// Largest-magnitude row-sum bound for ||A_h||, used for solver sizing.
  double norm_estimate() const;

  Eigen::MatrixXd dense() const;
  void dump_coordinate(std::ostream& os) const;

  /// Solve A_h* A_h Psi = rhs on the zero-mean subspace (SPD there) and
  /// return F = -A_h Psi. rhs must be quasi-compatible: <rhs,1> = 0 within
  /// 1e-10 ||rhs||. Residual contract: 1e-10 relative.
  AuxiliaryEllipticSolution solve_auxiliary_elliptic(const DGField& rhs) const;

private:
  struct EllipticCache {
    Eigen::LDLT<Eigen::MatrixXd> factorization;
    Eigen::MatrixXd normal;  // A^T A
    Eigen::VectorXd mean_direction;
  };
  const EllipticCache& elliptic() const;

  MeshPtr mesh_;
  int degree_;
  double T0_;
  Flux flux_;
  int neighbor_;  // -1: couples to the left cell, +1: to the right cell
  // diag_[j]: (m+1)x(m+1) row-major block, off_[j]: coupling of cell j to
  // cell j+neighbor_. On uniform meshes all blocks coincide bitwise.
  std::vector<Eigen::MatrixXd> diag_, off_;
  mutable std::shared_ptr<const EllipticCache> elliptic_cache_;
};

}  // namespace vpfp

#endif
