#pragma once

#include <stdexcept>
#include <string>

namespace macpp {

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit codes: NumericalError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public DegenerateInput {
 public:
  using DegenerateInput::DegenerateInput;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OutOfWindow : public Error {
 public:
  using Error::Error;
};

class UnknownTaxon : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class CycleError : public GraphError {
 public:
  using GraphError::GraphError;
};

class RoleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonPositiveBandwidth : public Error {
 public:
  using Error::Error;
};

class ZeroSamples : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The starting state of a chain has zero likelihood.
class InitializationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace macpp
