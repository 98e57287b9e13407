#ifndef VPFP_DG_FIELD_HPP
#define VPFP_DG_FIELD_HPP

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <utility>

#include "vpfp/mesh.hpp"
#include "vpfp/quadrature.hpp"

namespace vpfp {

/// One element of the broken polynomial space U_h^m: per-cell coefficients
/// in the L2-orthonormal Legendre basis
///   phi_{j,i}(x) = sqrt((2i+1)/h_j) P_i(2(x - x_j)/h_j),
/// stored cell-major (coeff index = j*(m+1) + i). The mass matrix is the
/// identity, so ||u||_{L2} equals the Euclidean norm of the coefficients.
class DGField {
public:
  DGField(MeshPtr mesh, int degree);

  const Mesh1D& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int num_cells() const { return mesh_->num_cells(); }
  int size() const { return static_cast<int>(coeffs_.size()); }

  Eigen::VectorXd& coeffs() { return coeffs_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  double coeff(int cell, int index) const { return coeffs_[cell * (degree_ + 1) + index]; }
  double& coeff(int cell, int index) { return coeffs_[cell * (degree_ + 1) + index]; }

  double l2_norm() const { return coeffs_.norm(); }
  /// <u, 1> over the torus.
  double integral() const;
  double mean() const { return integral() / mesh_->length(); }

  /// Pointwise value; x must lie in [x0, x0+L). At an interior interface the
  /// value from the right cell is returned; use evaluate_in_cell to pick a side.
  double evaluate(double x) const;
  double evaluate_in_cell(int cell, double x) const;

  /// One-sided limits (u^-, u^+) at interface i (periodic, i in [0, Nx)).
  std::pair<double, double> trace(int interface) const;

  DGField& operator+=(const DGField& other);
  DGField& operator-=(const DGField& other);
  DGField& operator*=(double factor);

  bool same_space(const DGField& other) const;

private:
  MeshPtr mesh_;
  int degree_;
  Eigen::VectorXd coeffs_;
};

/// L2 projection of g onto U_h^m. quad_points < 0 selects a high-order
/// default for non-polynomial integrands.
DGField l2_project(const std::function<double(double)>& g, MeshPtr mesh, int degree,
                   int quad_points = -1);

/// <u, v> over the torus; equals the coefficient dot product.
double l2_inner(const DGField& u, const DGField& v);

/// Broken H1 seminorm: sum of cellwise derivative norms plus the jump
/// seminorm with weights h_{j-1/2}^{-1} = min(h_{j-1}, h_j)^{-1}.
double broken_seminorm(const DGField& u);

/// Max of |u| over a per-cell Chebyshev sampling of at least 4(m+2) points
/// plus both cell endpoints.
double linf_norm(const DGField& u);

/// Tabulated reference-cell basis data shared by assembly and projection.
struct BasisTable {
  QuadratureRule rule;
  Eigen::MatrixXd values;       // (points) x (degree+1): sqrt(2i+1)... without 1/sqrt(h)
  Eigen::MatrixXd derivatives;  // reference-cell d/dxi of the same
};
BasisTable tabulate_basis(int degree, int quad_points);

/// Flat (cell, index, coefficient) rows with a header carrying Nx, m, L.
void write_csv(std::ostream& os, const DGField& u);

}  // namespace vpfp

#endif
