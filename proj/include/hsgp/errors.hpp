#pragma once

#include <stdexcept>

namespace hsgp {

// Non-convergence, overflow, or loss of numerical validity. CLI exit code 4.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A constructive check that was expected to hold failed. CLI exit code 3.
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hsgp
