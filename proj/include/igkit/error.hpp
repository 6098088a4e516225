#pragma once

#include <stdexcept>
#include <string>

namespace igkit {

// Base for every error raised by the library. Each subclass maps onto one
// CLI exit code (see tools/igkit.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on arguments or object state was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (unknown keys, out-of-range hyper-parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input data (images, checkpoints, banks).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace igkit
