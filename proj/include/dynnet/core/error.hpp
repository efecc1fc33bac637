#pragma once

#include <stdexcept>
#include <string>

namespace dynnet {

/// Root of every error thrown by the library. The CLI maps subclasses onto
/// exit codes: ConfigError -> 2, DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model spec, run configuration or layer geometry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a model cannot be assembled from a spec (bad shapes, groups).
class BuildError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class DataErrorCode {
  io,
  bad_magic,
  bad_version,
  truncated,
  label_out_of_range,
  subject_out_of_range,
  invalid_argument,
  degenerate,
};

const char* to_string(DataErrorCode code);

class DataError : public Error {
 public:
  DataError(DataErrorCode code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}

  DataErrorCode code() const { return code_; }

 private:
  DataErrorCode code_;
};

/// Non-finite values or failed numerical procedures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynnet
