#pragma once

#include <stdexcept>
#include <string>

namespace flowsteer {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, out-of-range time, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A formula was evaluated where it is singular (bridge endpoints, t at 0 or 1).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A tetrahedron has a zero-length edge.
class DegenerateGeometryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An estimator was used outside the situation it is valid for.
class ContractViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Non-finite value in a loss, a state or a weight.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Every particle weight vanished or became non-finite.
class DegenerateEnsembleError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Invalid run configuration or unreadable input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowsteer
