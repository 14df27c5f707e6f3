#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace uowq {

// Root of every error the library throws. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sample outside the family's support.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Parameter vector not valid for the family (wrong length, non-finite, off the simplex).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed call: dimension mismatch, empty input, out-of-range option.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the family or mode it was called with.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Iterative solver exhausted its budget. Carries the last iterate and its residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual)
      : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  // Gradient norm for the MLE, Frank-Wolfe gap for the simplex QP.
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

// Ensemble generation could not place a source inside the valid parameter region.
class RegimeError : public Error {
 public:
  using Error::Error;
};

// Brute-force oracle asked for a grid that would not fit in memory or time.
class ScaleError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

}  // namespace uowq
