#pragma once

#include <stdexcept>
#include <string>

namespace sfd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument: wrong shape, out-of-range index, non-finite value.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A computation produced or received a NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked on an object that is not ready for it.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Filesystem or decoding failure. The message carries the offending path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace sfd
