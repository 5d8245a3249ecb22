#pragma once

#include <stdexcept>
#include <string>

namespace kdi {

// Invalid input, configuration or shape. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf reached a layer boundary.
class NumericError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace kdi
