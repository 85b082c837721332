#pragma once

#include <stdexcept>
#include <string>

namespace apm {

// Failures of a well-posed computation (as opposed to std::invalid_argument,
// which every module throws for violated preconditions).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A tabulated prime function has no entry for the requested prime.
class LookupError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// The data do not support the requested normalization or ratio (zero
// variance, empty prime set, single member, ...).
class DegenerateError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class QuadratureError : public ComputationError {
 public:
  QuadratureError(const std::string& what, double achieved_tolerance)
      : ComputationError(what), achieved_tolerance_(achieved_tolerance) {}

  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double achieved_tolerance_;
};

// No catalogued closed form; callers should fall back to quadrature.
class NoClosedFormError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// Symbolic classification impossible (e.g. tabulated values).
class InconclusiveError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace apm
