#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attrsample {

/// Base for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but is semantically unusable (unknown node, empty graph, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid sampler, generator, task or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A sampling or generation run could not complete.
class RunError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace attrsample
