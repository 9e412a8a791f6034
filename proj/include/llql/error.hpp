#pragma once

#include <stdexcept>
#include <string>

namespace llql {

// Error hierarchy mapped to process exit codes by the CLI:
//   UsageError -> 1, DataError (and parse/type/runtime) -> 2, ModelError -> 3.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct UsageError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct ParseError : DataError {
  ParseError(const std::string& msg, int line, int col)
      : DataError(msg + " at line " + std::to_string(line) + ":" +
                  std::to_string(col)),
        line(line), col(col) {}
  int line, col;
};

struct TypeError : DataError {
  using DataError::DataError;
};

struct RuntimeError : DataError {
  using DataError::DataError;
};

struct UnsupportedOperation : RuntimeError {
  using RuntimeError::RuntimeError;
};

struct ModelError : Error {
  using Error::Error;
};

}  // namespace llql
