#pragma once

#include <stdexcept>
#include <string>

namespace forumdiv {

/// Malformed input file (JSON, JSON-lines, CSV).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a data invariant (duplicate ids, dangling references).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-supplied argument outside an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical routine failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forumdiv
