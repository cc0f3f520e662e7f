#pragma once

#include <stdexcept>

namespace rwgd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad shapes or sizes passed between components.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite input or a decomposition that could not be trusted.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed parameters (probabilities, moments, schedules, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A precondition of a convergence result does not hold for the instance.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

// Unreadable or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the outcome cap.
class BudgetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace rwgd
