#pragma once

#include <stdexcept>
#include <string>

namespace mirrorbit {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A bracketed or iterative solve failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  double residual = 0.0;
  explicit ConvergenceError(const std::string& what, double res = 0.0)
      : std::runtime_error(what), residual(res) {}
};

/// A requested level (threshold criterion, current crossing) is out of reach.
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Transfer curve never crosses the constant-current level (stuck device).
struct NoCrossingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AddressError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct SenseFault : std::runtime_error {
  std::string phase;
  SenseFault(const std::string& what, std::string ph)
      : std::runtime_error(what), phase(std::move(ph)) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mirrorbit
