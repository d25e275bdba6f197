#pragma once

#include <stdexcept>
#include <string>

namespace slowman {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input (config file, grid sizes, unsupported combination of flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: the computation ran but a contract could not be met.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Evaluation outside the region where a map is defined.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Matrix logarithm has no real principal branch (eigenvalue on the closed negative axis).
class BranchFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class DegenerateOrbit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ContinuationStall : public NumericalError {
 public:
  ContinuationStall(const std::string& what, double last_good_x)
      : NumericalError(what), last_good_x_(last_good_x) {}
  [[nodiscard]] double last_good_x() const noexcept { return last_good_x_; }

 private:
  double last_good_x_;
};

class InconsistentEmbedding : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class HyperbolicityViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnsupportedConfiguration : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DecompositionInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditionedBasis : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolvabilityFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearResonance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Closed-form parametrisation evaluated at a pole, where it loses rank.
class SingularParametrisation : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Requested order of the expansion is not implemented.
class UnsupportedOrder : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class FredholmViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace slowman
