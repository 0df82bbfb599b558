#pragma once

#include <stdexcept>
#include <string>

namespace dac {

// Base class so callers can catch everything from this library at once.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent configuration input. CLI maps this to exit code 1.
struct config_error : error {
  explicit config_error(const std::string& msg) : error(msg) {}
};

// Numerical failure inside the simulation. CLI maps this to exit code 2.
struct numeric_error : error {
  explicit numeric_error(const std::string& msg) : error(msg) {}
};

// Control allocation became singular after column redaction. The supervisor
// reacts by moving the decision factor toward the model side.
struct allocation_error : numeric_error {
  explicit allocation_error(const std::string& msg) : numeric_error(msg) {}
};

}  // namespace dac
