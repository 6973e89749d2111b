#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace risopt {

// Configuration / input problems (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Raised by the channel/scene/RIS file readers. field() names the offending
// JSON member (dotted path, e.g. "h_u[1]").
class FileFormatError : public ConfigError {
 public:
  enum class Kind { Malformed, MissingField, DimensionMismatch, SymmetryViolation, InvalidValue };

  FileFormatError(Kind kind, std::string field, const std::string& what)
      : ConfigError(field + ": " + what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

// Numerical failures (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DualityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InfeasibleUserError : public NumericalError {
 public:
  InfeasibleUserError(std::size_t user, const std::string& what)
      : NumericalError(what), user_(user) {}
  std::size_t user() const noexcept { return user_; }

 private:
  std::size_t user_;
};

}  // namespace risopt
