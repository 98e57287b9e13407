#ifndef VPFP_ERRORS_HPP
#define VPFP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vpfp {

// Failure taxonomy shared by the solvers and the CLI exit-code mapping.
// Argument/contract violations use std::invalid_argument directly.

/// Quasi-neutrality (or another compatibility condition) violated by an input.
class compatibility_violation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A linear or nonlinear solve failed to reach its residual contract.
class numeric_failure : public std::runtime_error {
public:
  numeric_failure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_ = 0.0;
};

/// Rate fitting requested on a window without enough usable samples.
class invalid_window : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// L-infinity ratio requested against identically zero data.
class undefined_ratio : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace vpfp

#endif
