#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfaffopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad problem file, dimension mismatch, invalid grid.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  enum class Kind { syntax, unknown_identifier, unknown_function };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : InputError(what + " at offset " + std::to_string(offset)),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Evaluation outside the domain of an operation (ln 0, sqrt(-1), 1/0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised by operations that are defined for smooth expressions only.
class ExprError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class SingularJacobianError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A right-hand side failed while integrating; `t()` is where it happened.
class OdeDomainError : public SolverError {
 public:
  OdeDomainError(double t, const std::string& what)
      : SolverError(what + " (t = " + std::to_string(t) + ")"), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

/// A parameter path crosses a declared singularity (multiplier 0, fold).
class SingularPathError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfaffopt
