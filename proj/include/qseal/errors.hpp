#pragma once

#include <stdexcept>
#include <string>

namespace qseal {

// Invalid user-supplied configuration or arguments. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical invariant failed at runtime. CLI maps this to exit code 2.
class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qseal
