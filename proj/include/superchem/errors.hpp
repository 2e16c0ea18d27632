#pragma once

#include <stdexcept>
#include <string>

namespace superchem {

/// Process exit codes, one per error category.  The CLI maps thrown
/// exceptions onto these so scripted callers can distinguish failure modes.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  config = 2,
  divergence = 3,
  capacity = 4,
  accuracy = 5,
  io = 6,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept { return ExitCode::internal; }
};

/// Malformed or inconsistent run configuration (unknown key, missing key,
/// bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

/// Physically invalid parameter value (negative decay rate, zero PA
/// strength, ...).  A subcategory of configuration failure.
class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// An amplitude left the trust region (non-finite or above the guard
/// threshold).  Carries the scaled time of failure when known.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what, double tau = -1.0)
      : Error(what), tau_(tau) {}
  ExitCode exit_code() const noexcept override { return ExitCode::divergence; }
  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

/// Requested problem size exceeds a configured capacity bound.
class CapacityError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::capacity; }
};

/// Integrator self-check failed (e.g. norm drift beyond tolerance).
class AccuracyError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::accuracy; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

}  // namespace superchem
