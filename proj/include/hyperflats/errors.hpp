#pragma once

#include <stdexcept>
#include <string>

namespace hyperflats {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the requested function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A hyperbolic-only operation was handed the flat (K = 0) curvature.
class CurvatureModeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The (d, q, gamma, u) parameter set violates one of its invariants.
class InvalidConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Input vectors are linearly dependent at the requested tolerance.
class RankError : public Error {
 public:
  using Error::Error;
};

/// A quadrature result is inconsistent with its own error estimate, e.g. a
/// probability that leaves [0, 1] by more than the reported uncertainty.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperflats
