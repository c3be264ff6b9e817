#pragma once

#include <stdexcept>
#include <string>

namespace multipath {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category, e.g. "input" or "stability".
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed or inconsistent input (unknown ids, bad rationals, bad flags).
class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "input"; }
};

/// An exponential enumeration would exceed the configured cap.
class SizeError : public Error {
 public:
  SizeError(const std::string& what, std::size_t cap) : Error(what), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }
  const char* kind() const noexcept override { return "size"; }

 private:
  std::size_t cap_;
};

/// Loads violate a strict stability (cut) inequality.
class StabilityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "stability"; }
};

/// The peak-rate equilibrium is not unique (a load sum hits a cut capacity).
class NonUniquenessError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "non_uniqueness"; }
};

/// An iterative numerical method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }
  const char* kind() const noexcept override { return "convergence"; }

 private:
  double residual_;
};

/// A result that the theory guarantees failed to materialize; indicates a bug.
class ConsistencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "consistency"; }
};

}  // namespace multipath
