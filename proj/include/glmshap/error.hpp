#pragma once

#include <stdexcept>
#include <string>

namespace glmshap {

/// Broad error classes; the CLI maps each one to an exit code.
enum class ErrorKind {
  kConfig,     // exit code 2
  kData,       // exit code 3
  kNumerical,  // exit code 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

enum class DataErrorCode {
  kMissingColumn,
  kDegenerateColumn,
  kType,
  kMissingValue,
  kResponseDomain,
  kDegenerateHurdle,
  kShape,
  kParse,
};

class DataError : public Error {
 public:
  DataError(DataErrorCode code, const std::string& message)
      : Error(ErrorKind::kData, message), code_(code) {}

  DataErrorCode code() const noexcept { return code_; }

 private:
  DataErrorCode code_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorKind::kNumerical, message) {}
};

/// The null deviance vanishes (e.g. constant response), so no normalized
/// measure is defined for the run.
class DegenerateRunError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A mean value on the boundary of the family's domain made the divergence
/// infinite.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace glmshap
