#pragma once

#include <stdexcept>
#include <string>

namespace nsstat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, solver, measure or analysis configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (e.g. a radius beyond the half period).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (e.g. a field that is not divergence free).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input is degenerate for the requested normalisation (e.g. zero reference energy).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The time integrator produced NaN or unbounded energy growth.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time, int member = -1)
      : Error(what), time_(time), member_(member) {}
  double time() const { return time_; }
  int member() const { return member_; }

 private:
  double time_;
  int member_;
};

}  // namespace nsstat
