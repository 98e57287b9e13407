#ifndef VPFP_LEGENDRE_HPP
#define VPFP_LEGENDRE_HPP

#include <vector>

namespace vpfp {

/// Values P_0(x)...P_n(x) of the standard Legendre polynomials on [-1,1].
void legendre_values(int n, double x, double* out);

/// Values and first derivatives P_i(x), P_i'(x), i = 0..n.
void legendre_values_and_derivatives(int n, double x, double* values, double* derivatives);

inline double legendre_at_right(int i) { return 1.0; }
inline double legendre_at_left(int i) { return (i % 2 == 0) ? 1.0 : -1.0; }

/// Orthonormal Hermite functions against the standard Gaussian weight:
/// xi H_k = sqrt(k) H_{k-1} + sqrt(k+1) H_{k+1}, H_0 = 1. Fills H_0..H_n at xi.
void hermite_values(int n, double xi, double* out);

}  // namespace vpfp

#endif
