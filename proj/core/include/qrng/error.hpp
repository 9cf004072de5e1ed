#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

/// Coarse error classes. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  usage = 1,  // invalid arguments or configuration
  data = 2,   // malformed input, calibration fault, insufficient data
  io = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Argument outside the mathematical domain of a routine.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Block geometry that violates extractor constraints (seed length, m/n vs ratio).
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Measured data inconsistent with the noise model: negative derived
/// variance, unphysical symplectic eigenvalue, no quantum signal.
class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class LengthError : public Error {
 public:
  explicit LengthError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace qrng
