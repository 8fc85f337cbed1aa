#pragma once

#include <stdexcept>
#include <string>

namespace tmle {

// Bad user input: malformed config, out-of-range arguments, data outside the cube.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration files and CLI arguments.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// A numerical procedure could not deliver its contract (non-finite values,
// failed inversions, monotonicity violations).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InversionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MonotonicityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A value falls outside the range a function is defined on (link range,
// KL denominators).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tmle
