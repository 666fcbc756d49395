#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace raftsim {

// Error hierarchy used across the library.  InputError covers bad
// configuration or malformed on-disk data and maps to process exit code 2;
// NumericalError covers failures of the numerics themselves (blow-up,
// singular solves, non-convergence) and maps to exit code 3.

class RaftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public RaftError {
 public:
  using RaftError::RaftError;
};

class NumericalError : public RaftError {
 public:
  using RaftError::RaftError;
};

// Invalid configuration values (non-positive sizes, odd grid, ...).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Malformed or unreadable snapshot files.
class SnapshotError : public InputError {
 public:
  using InputError::InputError;
};

// Time integration produced a non-finite state.
class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A linear solve was requested for a singular system (e.g. a pure-Neumann
// Poisson problem with a right-hand side that is not mean-free).
class SingularSystemError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A mathematical precondition of the requested operation does not hold
// (e.g. no admissible root of a compatibility equation).
class ConditionViolatedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The requested exchange law is not supported by this code path.
class UnsupportedLawError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// An iterative solver hit its iteration cap; carries the residual history.
class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& msg, std::vector<double> history)
      : NumericalError(msg), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace raftsim
