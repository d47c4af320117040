#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fjd {

/// Input violates a documented precondition (non-finite values, negative
/// densities, inconsistent sizes).
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Requested object is larger than the configured memory / enumeration cap.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Kernel support does not fit in half of the periodic box.
struct AliasingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NormalizationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Unsupported : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Time integration produced NaN or Inf.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace fjd
