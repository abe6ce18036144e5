#pragma once

#include <stdexcept>
#include <string>

namespace cattaneo {

// Base of every error raised by the toolkit. The CLI maps subclasses onto
// exit codes, so new failure modes should derive from one of the groups below
// rather than from std::runtime_error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the admissible state set (rho <= 0, theta <= 0, xi = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A thermodynamic closure violates the positivity assumptions on p, p_rho,
/// p_theta, e_theta or kappa.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Generic numerical failure (negative discriminant, non-finite result, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotDiagonalizable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Eigenvalue clustering did not produce the expected {4,1,1,1,1} profile.
class ProfileMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A pivot of the forced-zero cascade vanished (some q_i = 0).
class CascadeBroken : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// xi left the neighbourhood on which the witness branch is defined.
class DegenerateDirection : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cattaneo
