#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affdim {

enum class ErrorCode {
  SingularMatrix,
  NegativeExponent,
  NonPositiveEntry,
  EmptyFamily,
  ParameterOrder,
  PositivityNotAchieved,
  RootTooLarge,
  OverlapDetected,
  BudgetExceeded,
  EmptySubset,
  InfiniteSubset,
  LowerUnavailable,
  TailUnavailable,
  NotPositive,
  ConstantsUnavailable,
  Uncertifiable,
  AssumptionViolated,
  Inconclusive,
  SyntaxError,
  IndexNotInSystem,
  InvalidSystem,
  InvalidArgument,
  ConfigParse,
  FileIO,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NegativeExponent: return "NegativeExponent";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::ParameterOrder: return "ParameterOrder";
    case ErrorCode::PositivityNotAchieved: return "PositivityNotAchieved";
    case ErrorCode::RootTooLarge: return "RootTooLarge";
    case ErrorCode::OverlapDetected: return "OverlapDetected";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::InfiniteSubset: return "InfiniteSubset";
    case ErrorCode::LowerUnavailable: return "LowerUnavailable";
    case ErrorCode::TailUnavailable: return "TailUnavailable";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::ConstantsUnavailable: return "ConstantsUnavailable";
    case ErrorCode::Uncertifiable: return "Uncertifiable";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::IndexNotInSystem: return "IndexNotInSystem";
    case ErrorCode::InvalidSystem: return "InvalidSystem";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::FileIO: return "FileIO";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Carries the deepest word length that still fits the budget.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(unsigned feasible_depth, const std::string& message)
      : Error(ErrorCode::BudgetExceeded, message), feasible_depth_(feasible_depth) {}

  unsigned feasible_depth() const noexcept { return feasible_depth_; }

 private:
  unsigned feasible_depth_;
};

/// Position is a 0-based character offset into the parsed text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorCode::SyntaxError, message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace affdim
