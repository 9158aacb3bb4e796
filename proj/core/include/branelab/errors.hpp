#pragma once

#include <stdexcept>
#include <string>

namespace branelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two operands live on different manifold models.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid model declaration, coordinate index or point dimension.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Degree overflow, wrong degree input, malformed frame.
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// A 2-form matrix could not be inverted. Carries the condition number.
class DegenerateForm : public Error {
 public:
  DegenerateForm(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// An exact-mode operation was requested on non-constant coefficients.
class NonConstantForm : public Error {
 public:
  using Error::Error;
};

/// Declared frames disagree with the geometry they are supposed to describe.
class FrameMismatch : public Error {
 public:
  using Error::Error;
};

/// The time-one flow does not preserve the requested space-filling brane.
class BraneObstruction : public Error {
 public:
  using Error::Error;
};

/// The average condition on rho fails, so no infinitesimal brane
/// deformation lies over r = rho dq.
class AverageObstruction : public Error {
 public:
  using Error::Error;
};

/// A 2-form that must be closed and of type (1,1) is not.
class Type11Violation : public Error {
 public:
  using Error::Error;
};

/// Step underflow or non-finite state during flow integration.
class FlowError : public Error {
 public:
  using Error::Error;
};

/// Text grammar error with 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(format(msg, line, column)), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + msg;
  }
  int line_;
  int column_;
};

}  // namespace branelab
