#pragma once

#include <stdexcept>
#include <string>

namespace dscjscc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when tensor shapes disagree. The message names the offending dimension.
class ShapeError : public Error {
 public:
  ShapeError(const std::string& op, const std::string& dimension, std::size_t expected, std::size_t actual)
      : Error(op + ": " + dimension + " mismatch (expected " + std::to_string(expected) + ", got " +
              std::to_string(actual) + ")"),
        dimension_(dimension) {}
  explicit ShapeError(const std::string& message) : Error(message) {}

  const std::string& dimension() const { return dimension_; }

 private:
  std::string dimension_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dscjscc
