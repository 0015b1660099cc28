// error.hpp
// Exception hierarchy shared by all modules.

#pragma once

#include <stdexcept>
#include <string>

namespace zqvae {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or configuration: maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Shapes or qubit counts that do not line up.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failure while computing (non-finite objective, I/O, ...): exit code 2.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace zqvae
