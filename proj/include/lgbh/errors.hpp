#pragma once

#include <stdexcept>
#include <string>

namespace lgbh {

/// Base class for every error raised by the library. `code()` is the
/// process exit status the command-line front-end maps it to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int code() const noexcept { return 1; }
  virtual const char* kind() const noexcept { return "Error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "ParseError"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "ValidationError"; }
};

/// The angular part of a density profile dips below zero somewhere.
class NonPhysicalDensity : public Error {
 public:
  explicit NonPhysicalDensity(double minimum)
      : Error("density profile is negative somewhere (minimum " +
              std::to_string(minimum) + ")"),
        minimum_(minimum) {}
  double minimum() const noexcept { return minimum_; }
  int code() const noexcept override { return 4; }
  const char* kind() const noexcept override { return "NonPhysicalDensity"; }

 private:
  double minimum_;
};

class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 5; }
  const char* kind() const noexcept override { return "QuadratureNotConverged"; }
};

/// A plaquette contains a hop whose amplitude is numerically zero.
class BrokenPlaquette : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 6; }
  const char* kind() const noexcept override { return "BrokenPlaquette"; }
};

class BasisTooLarge : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 7; }
  const char* kind() const noexcept override { return "BasisTooLarge"; }
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }
  int code() const noexcept override { return 8; }
  const char* kind() const noexcept override { return "ConvergenceFailure"; }

 private:
  double residual_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 11; }
  const char* kind() const noexcept override { return "DimensionMismatch"; }
};

/// Raised by the front-end when a `check` run reports a failing invariant.
class CheckFailed : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 9; }
  const char* kind() const noexcept override { return "CheckFailed"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 10; }
  const char* kind() const noexcept override { return "IoError"; }
};

}  // namespace lgbh
