#pragma once

#include <stdexcept>
#include <string>

namespace oamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad shapes, bad configuration, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite values, divergence, or an internal numeric invariant broke.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A metric whose definition does not apply to the input (e.g. zero
/// denominator, empty boundary band).
class UndefinedMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace oamp
