#pragma once

#include <stdexcept>
#include <string>

namespace ebm {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  OutOfRange,
  SingularMatrix,
  RankDeficient,
  NotSPD,
  NoConvergence,
  DegreeZero,
  Unsupported,
  RankTooLow,
  NewtonDiverged,
  LinearSolveFailed,
  EmptyGrid,
  DivisionByZero,
  DegenerateNormalization,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegreeZero: return "DegreeZero";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::RankTooLow: return "RankTooLow";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ebm
