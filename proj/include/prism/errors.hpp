// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace prism {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform for the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, divergence, or a failed numeric certification.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace prism
