#pragma once

#include <stdexcept>
#include <string>

namespace jacspec {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (e.g. z on the positive axis).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A user-supplied function returned a non-finite value.
class EvaluationError : public Error {
public:
  using Error::Error;
};

/// Iterative or quadrature procedure failed to meet its tolerance.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Invalid measure, network or run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace jacspec
