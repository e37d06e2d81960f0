#pragma once

#include <stdexcept>
#include <string>

namespace bdflow {

/// Bad or inconsistent inputs: size mismatches, out-of-range parameters,
/// rejected configuration values. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to meet its contract (Newton stagnation,
/// eigensolver not converging, singular matrix). Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bdflow
