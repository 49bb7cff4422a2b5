#pragma once

#include <stdexcept>
#include <string>

namespace mobigraph {

// Malformed input: bad files, inconsistent dimensions, invariant violations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid configuration values (reported as usage errors by the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite losses, solver breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mobigraph
