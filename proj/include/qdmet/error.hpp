#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdmet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number (0 when the error is
/// not attached to a particular line).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Arguments that violate a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Ill-conditioned or singular numerical input.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Degenerate frontier orbitals leave the closed-shell occupation undefined.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Iterative procedure ran out of iterations. `residual` is the last measured
/// convergence residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qdmet
