#pragma once

#include <stdexcept>
#include <string>

namespace dualview {

// Root of the project's exception hierarchy. The CLI maps each family to an
// exit code: usage/config -> 1, data -> 2, numerical -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up (matrix products, feature widths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or configuration combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid runtime input: empty candidate lists, bad labels.
class InputError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong state (e.g. backward on an empty tape).
class StateError : public Error {
 public:
  using Error::Error;
};

// More candidates than the positional table holds.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Dataset or checkpoint could not be parsed or validated.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or a violated numerical invariant.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualview
