#pragma once

#include <stdexcept>
#include <string>

namespace pairsim {

/// Bad user input: malformed config, out-of-range parameter, inconsistent spec.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Simulation left its validity envelope: truncation leak, non-symplectic
/// transfer, unitarity drift, tachyonic frequency, failed convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pairsim
