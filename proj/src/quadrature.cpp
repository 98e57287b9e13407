#include "vpfp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "vpfp/legendre.hpp"

namespace vpfp {

// Newton iteration on P_n with Chebyshev-like initial guesses; nodes are
// symmetrized so the rule is exactly even.
QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature: need at least one point");
  QuadratureRule rule;
  rule.order = 2 * n - 1;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  std::vector<double> p(n + 1), dp(n + 1);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      legendre_values_and_derivatives(n, x, p.data(), dp.data());
      const double dx = p[n] / dp[n];
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_values_and_derivatives(n, x, p.data(), dp.data());
    const double w = 2.0 / ((1.0 - x * x) * dp[n] * dp[n]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = 0.0;
    legendre_values_and_derivatives(n, 0.0, p.data(), dp.data());
    rule.weights[n / 2] = 2.0 / (dp[n] * dp[n]);
  }
  return rule;
}

int default_quadrature_points(int degree) {
  return (3 * degree + 4 + 1) / 2;  // ceil((3m+4)/2)
}

}  // namespace vpfp
