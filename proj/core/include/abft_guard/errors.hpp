#pragma once

#include <stdexcept>
#include <string>

namespace abft_guard {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layer geometry that cannot be realised (non-positive output extent,
/// grouped convolution, zero-sized fields).
class InvalidLayerError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Exact-integer arithmetic left the 64-bit range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class InvalidTilingError : public Error {
 public:
  using Error::Error;
};

class InvalidFaultError : public Error {
 public:
  using Error::Error;
};

/// Document or argument validation failure. `path()` names the offending
/// field (e.g. "layers[2].kernel").
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace abft_guard
