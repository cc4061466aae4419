#pragma once

#include <stdexcept>
#include <string>

namespace embz {

/// Malformed input or configuration. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical quality failure (eigensolver, quadrature, mass bookkeeping). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncation budget too small for the configured tail cap.
class BudgetError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Filesystem failures. CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace embz
