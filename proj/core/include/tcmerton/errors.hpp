#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or configuration parameter. `field()` names the offender.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Tridiagonal solve broke down at a given backward time step.
class SolverError : public Error {
 public:
  SolverError(std::size_t step, const std::string& what)
      : Error("time step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A structural property that must hold by construction was violated.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A query falls outside the region covered by the computational grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration exhausted its budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace tcm
