#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace argbench {

// Base for every error the library raises. Callers that only need a message
// can catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: out-of-range parameters, malformed config, invalid flags.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Ontology too small for the requested topology.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Text that does not follow an expected grammar. line() is 1-based, 0 when
// the problem is not tied to a single line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Files that disagree with each other (unknown ids, coverage mismatches).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Filesystem or environment problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Metrics requested over a record set with nothing to score.
class NoDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace argbench
