#ifndef VPFP_QUADRATURE_HPP
#define VPFP_QUADRATURE_HPP

#include <vector>

namespace vpfp {

/// Gauss-Legendre rule on the reference cell [-1,1].
struct QuadratureRule {
  int order = 0;  // exact for polynomials up to this degree
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule, exact for degree 2n-1.
QuadratureRule gauss_legendre(int n);

/// Points of the module-wide default rule for degree-m spaces:
/// ceil((3m+4)/2) points, exact for degree 3m+3.
int default_quadrature_points(int degree);

}  // namespace vpfp

#endif
