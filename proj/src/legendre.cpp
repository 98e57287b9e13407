#include "vpfp/legendre.hpp"

#include <cmath>

namespace vpfp {

void legendre_values(int n, double x, double* out) {
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = x;
  for (int k = 1; k < n; ++k)
    out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1);
}

void legendre_values_and_derivatives(int n, double x, double* values, double* derivatives) {
  legendre_values(n, x, values);
  derivatives[0] = 0.0;
  if (n == 0) return;
  derivatives[1] = 1.0;
  // P'_{k+1} = P'_{k-1} + (2k+1) P_k
  for (int k = 1; k < n; ++k)
    derivatives[k + 1] = derivatives[k - 1] + (2 * k + 1) * values[k];
}

void hermite_values(int n, double xi, double* out) {
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = xi;
  for (int k = 1; k < n; ++k)
    out[k + 1] = (xi * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
}

}  // namespace vpfp
