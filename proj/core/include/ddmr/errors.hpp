#pragma once

#include <stdexcept>
#include <string>

namespace ddmr {

/// Malformed or inconsistent configuration input (bad file, unknown key,
/// missing section).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A domain invariant was violated (sign constraint, non-finite input,
/// dimension mismatch).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Numerical blow-up: integration produced a non-finite state, or training
/// produced a non-finite loss/gradient.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ddmr
