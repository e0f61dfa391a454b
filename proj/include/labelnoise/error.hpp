#pragma once

#include <stdexcept>
#include <string>

namespace labelnoise {

enum class ErrorKind {
  NonStochastic,
  Singular,
  NegativeEntry,
  ZeroColumn,
  ZeroWeakLabelMass,
  EmptyWeakClass,
  DimensionMismatch,
  WrongOrientation,
  AllNonPositive,
  EmptyEvalSet,
  DegenerateFit,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonStochastic: return "NonStochastic";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::ZeroWeakLabelMass: return "ZeroWeakLabelMass";
    case ErrorKind::EmptyWeakClass: return "EmptyWeakClass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::WrongOrientation: return "WrongOrientation";
    case ErrorKind::AllNonPositive: return "AllNonPositive";
    case ErrorKind::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Exception carrying a machine-checkable failure kind; the message always
/// names the offending quantity (column index, sum, determinant, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse/IO problems are usage errors (CLI exit code 2); the rest are domain
// errors (exit code 1).
inline bool is_usage_error(ErrorKind kind) {
  return kind == ErrorKind::ParseError || kind == ErrorKind::IoError;
}

}  // namespace labelnoise
