#pragma once

#include <stdexcept>
#include <string>

namespace dicke {

// Failure categories map onto distinct CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed configuration, out-of-range arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Propagation or linear-algebra failures: truncation leakage, positivity loss, step underflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Requested problem exceeds a dimension or memory ceiling.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace dicke
