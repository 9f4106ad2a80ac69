#pragma once

#include <stdexcept>
#include <string>

namespace mlglm {

// Invalid or malformed configuration / model description.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric precondition or sanity check failed (non-finite value, value
// outside its admissible box, truncation cap touched, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver exhausted its iteration budget.
struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

}  // namespace mlglm
