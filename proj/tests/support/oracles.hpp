#ifndef VPFP_TESTS_ORACLES_HPP
#define VPFP_TESTS_ORACLES_HPP

// Independent ground-truth helpers for the test suites. Everything here
// works through dense quadrature and the bilinear forms written out
// term-by-term, never through the banded production assembly.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "vpfp/dg_field.hpp"
#include "vpfp/mesh.hpp"
#include "vpfp/transport.hpp"

namespace vpfp::testing {

inline DGField unit_field(MeshPtr mesh, int degree, int flat_index) {
  DGField u(std::move(mesh), degree);
  u.coeffs()[flat_index] = 1.0;
  return u;
}

/// Dense quadrature of int_T f g over the torus.
inline double dense_integral(const Mesh1D& mesh,
                             const std::function<double(double)>& f, int points = 40) {
  const QuadratureRule rule = gauss_legendre(points);
  double acc = 0.0;
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    for (int a = 0; a < rule.size(); ++a) {
      const double x = mesh.cell_center(j) + 0.5 * h * rule.nodes[a];
      acc += rule.weights[a] * 0.5 * h * f(x);
    }
  }
  return acc;
}

/// a_h(D, u) evaluated term-by-term: one-sided fluxes times test jumps plus
/// the cellwise quadrature of D u'.
inline double a_form(const DGField& d, const DGField& u, double t0, Flux flux,
                     bool adjoint) {
  const Mesh1D& mesh = d.mesh();
  double interface_sum = 0.0;
  for (int s = 0; s < mesh.num_cells(); ++s) {
    const auto [d_minus, d_plus] = d.trace(s);
    const auto [u_minus, u_plus] = u.trace(s);
    const bool take_minus = adjoint == (flux == Flux::plus_minus);
    const double g = take_minus ? d_minus : d_plus;
    interface_sum += g * (u_plus - u_minus);
  }
  double volume = 0.0;
  const QuadratureRule rule = gauss_legendre(25);
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    const double center = mesh.cell_center(j);
    for (int a = 0; a < rule.size(); ++a) {
      const double x = center + 0.5 * h * rule.nodes[a];
      // du/dx by a wide five-point stencil, exact for the polynomial degrees
      // in play; the quadrature nodes are interior, so x +- 2s stays inside.
      const double s = 0.2 * (0.5 * h - std::abs(x - center));
      const double du = (8.0 * (u.evaluate_in_cell(j, x + s) - u.evaluate_in_cell(j, x - s)) -
                         (u.evaluate_in_cell(j, x + 2.0 * s) -
                          u.evaluate_in_cell(j, x - 2.0 * s))) /
                        (12.0 * s);
      volume += rule.weights[a] * 0.5 * h * d.evaluate_in_cell(j, x) * du;
    }
  }
  const double sign = adjoint ? 1.0 : -1.0;
  return sign * std::sqrt(t0) * (interface_sum + volume);
}

/// Dense matrix of A_h (or A_h*) assembled from the form, entry by entry.
inline Eigen::MatrixXd dense_operator_oracle(MeshPtr mesh, int degree, double t0, Flux flux,
                                             bool adjoint) {
  const int n = mesh->num_cells() * (degree + 1);
  Eigen::MatrixXd out(n, n);
  for (int col = 0; col < n; ++col) {
    const DGField trial = unit_field(mesh, degree, col);
    for (int row = 0; row < n; ++row) {
      const DGField test = unit_field(mesh, degree, row);
      // <A D, u> = a_h(D, u) and <D, A* u> = a_h*(u, D); in both cases the
      // trial function sits in the flux slot of the form.
      out(row, col) = a_form(trial, test, t0, flux, adjoint);
    }
  }
  return out;
}

/// Gauss-Hermite rule for the standard Gaussian weight (Golub-Welsch):
/// sum w_i g(x_i) ~ int g(x) exp(-x^2/2)/sqrt(2 pi) dx.
inline void gauss_hermite_prob(int n, std::vector<double>& nodes,
                               std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()[i];
    const double first = solver.eigenvectors()(0, i);
    weights[i] = first * first;
  }
}

/// L2 norm of (u - g) by dense quadrature.
inline double l2_error_against(const DGField& u, const std::function<double(double)>& g,
                               int points = 40) {
  const double sq = dense_integral(u.mesh(), [&](double x) {
    const double d = u.evaluate(x) - g(x);
    return d * d;
  }, points);
  return std::sqrt(sq);
}

}  // namespace vpfp::testing

#endif
