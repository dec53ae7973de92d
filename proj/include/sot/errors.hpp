#pragma once

#include <stdexcept>
#include <string>

namespace sot {

// User-correctable input problems: malformed files, bad manifests, bad flags.
// The CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A caller broke an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sot
