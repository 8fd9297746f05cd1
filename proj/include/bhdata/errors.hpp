#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bhdata {

/// Failure categories raised by the construction stages. The CLI maps every
/// kind except `Usage` and `Io` to the "verified failure" exit code.
enum class ErrorKind {
  Resolution,
  PositivityFailed,
  CurvatureSignLost,
  StepFailure,
  ClosureNotSmooth,
  InputNotPSC,
  PathPositivityFailed,
  SolveFailure,
  NotPSC,
  PositivityLost,
  SearchExhausted,
  HypothesisViolated,
  MatchingFailed,
  Usage,
  Io,
};

// Compact scientific formatting for diagnostics.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Resolution: return "ResolutionError";
    case ErrorKind::PositivityFailed: return "PositivityFailed";
    case ErrorKind::CurvatureSignLost: return "CurvatureSignLost";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::ClosureNotSmooth: return "ClosureNotSmooth";
    case ErrorKind::InputNotPSC: return "InputNotPSC";
    case ErrorKind::PathPositivityFailed: return "PathPositivityFailed";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::NotPSC: return "NotPSC";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::MatchingFailed: return "MatchingFailed";
    case ErrorKind::Usage: return "UsageError";
    case ErrorKind::Io: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the pipeline: wraps a stage error with the name of the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "stage '" + stage + "': " + strip(cause.what())), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  static std::string strip(const std::string& w) {
    const auto k = w.find(": ");
    return k == std::string::npos ? w : w.substr(k + 2);
  }
  std::string stage_;
};

}  // namespace bhdata
