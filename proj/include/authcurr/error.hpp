#pragma once

#include <stdexcept>
#include <string>

namespace authcurr {

// Bad input data: malformed records, mismatched dimensions, violated
// preconditions on user-supplied content. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values (exit code 1 in the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace authcurr
