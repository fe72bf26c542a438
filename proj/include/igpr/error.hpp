#pragma once

#include <stdexcept>
#include <string>

namespace igpr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, invalid parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear-algebra or quadrature step could not be completed.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double diagnostic = 0.0)
      : Error(what), diagnostic_(diagnostic) {}

  /// Conditioning or mass diagnostic attached by the raising site.
  double diagnostic() const noexcept { return diagnostic_; }

 private:
  double diagnostic_;
};

/// A forward model produced a non-finite or otherwise invalid trajectory.
class SimulationFailure : public Error {
 public:
  using Error::Error;
};

/// Run configuration or bundle schema problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace igpr
