#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hawkesfeed {

// Every error the library raises derives from Error. The CLI maps each class
// to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }
  int exit_code() const noexcept override { return 2; }

 private:
  std::size_t line_;
};

/// Inconsistent configuration: dimension mismatch, negative weights, bad flags.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A caller broke an operation's precondition (time rewinding, t < 0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

/// Estimation cannot proceed: no events, unidentifiable parameters, -inf likelihood.
class EstimationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

}  // namespace hawkesfeed
