#pragma once

#include <stdexcept>
#include <string>

namespace corrsets {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: dimension mismatches, out-of-range parameters, malformed
// configuration files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A posed feasibility/synthesis problem has no solution (e.g. no admissible
// eta on the grid, no contractive multiplier s).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// An iterative method failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace corrsets
