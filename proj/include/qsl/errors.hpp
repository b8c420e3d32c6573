#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsl {

enum class ErrorCode {
  // linear algebra / geometry
  NonHermitianInput,
  IndefiniteInput,
  SupportMismatch,
  NotNormalized,
  NegativeEffective,
  InvalidArgument,
  // dynamics
  DimensionMismatch,
  StepTooLarge,
  // case studies
  DomainError,
  DispersiveViolation,
  BlochBoundary,
  // configuration and I/O
  ParseError,
  MissingKey,
  InvalidValue,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::IndefiniteInput: return "IndefiniteInput";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NegativeEffective: return "NegativeEffective";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DispersiveViolation: return "DispersiveViolation";
    case ErrorCode::BlochBoundary: return "BlochBoundary";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

constexpr bool is_config_error(ErrorCode code) {
  return code == ErrorCode::ParseError || code == ErrorCode::MissingKey ||
         code == ErrorCode::InvalidValue;
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration error carrying the offending key and (1-based) line, when known.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::string key, int line, const std::string& message)
      : Error(code, format(key, line, message)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + message;
  }

  std::string key_;
  int line_;
};

}  // namespace qsl
