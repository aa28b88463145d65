#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyptimes {

// Bad arguments, malformed configs, violated preconditions the caller controls.
// The CLI maps this family to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stated hypothesis of an estimate does not hold for the supplied data
// (e.g. a derivative norm vanishes where a positive lower bound is required).
class HypothesisViolationError : public InputError {
 public:
  using InputError::InputError;
};

// Numerical failure while computing. The CLI maps this family to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// State norm exceeded the divergence guard during integration.
class BlowUpError : public NumericError {
 public:
  BlowUpError(double t, double norm)
      : NumericError("trajectory blow-up at t = " + std::to_string(t) +
                     " (state norm " + std::to_string(norm) + ")"),
        time(t),
        state_norm(norm) {}
  double time;
  double state_norm;
};

// The vector field dropped below the minimum usable magnitude along a
// trajectory, so normal frames and the Poincare cocycle are undefined there.
class SingularityProximityError : public NumericError {
 public:
  SingularityProximityError(std::size_t sample, double norm)
      : NumericError("vector field magnitude " + std::to_string(norm) +
                     " below threshold at sample " + std::to_string(sample)),
        sample_index(sample),
        field_norm(norm) {}
  std::size_t sample_index;
  double field_norm;
};

}  // namespace hyptimes
