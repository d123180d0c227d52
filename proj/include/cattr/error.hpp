#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cattr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid graph structure: cycles, duplicate edges, unknown endpoints.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Arguments violating a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Transport or protocol failures talking to a completion backend.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

 private:
  std::string payload_;
};

// Transcript cache inconsistencies.
class CacheError : public Error {
 public:
  using Error::Error;
};

// Scenario simulation exhausted its resample budget.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

}  // namespace cattr
