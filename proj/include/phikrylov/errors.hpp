#pragma once

#include <stdexcept>
#include <string>

namespace phikrylov {

enum class ErrorCode {
  SingularMatrix,
  NoConvergence,
  Overflow,
  DimensionMismatch,
  ParseError,
  UnsupportedField,
  SolveFailure,
  SingularShift,
  SingularProjected,
  BasisMismatch,
  StiffFailure,
  SingularStart,
  AssumptionViolated,
  DivergentIntegral,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/** @brief Library error carrying a machine-checkable code. */
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/** @brief Matrix Market parse failure; line is 1-based, 0 when unknown. */
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedField: return "UnsupportedField";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::SingularProjected: return "SingularProjected";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::StiffFailure: return "StiffFailure";
    case ErrorCode::SingularStart: return "SingularStart";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace phikrylov
