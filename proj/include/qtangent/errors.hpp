#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qtangent {

enum class ErrorKind {
  InvalidParameter,
  NonConvergent,
  TruncationExceeded,
  DivergentTerm,
  InvalidTime,
  InvalidState,
  UnknownProcess,
  NotNormalized,
  NonFinite,
  InvalidInit,
  InvalidThreshold,
  OutOfSupport,
  QuadratureFailure,
  BranchCut,
  NonConvergentLadder,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::TruncationExceeded: return "TruncationExceeded";
    case ErrorKind::DivergentTerm: return "DivergentTerm";
    case ErrorKind::InvalidTime: return "InvalidTime";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::UnknownProcess: return "UnknownProcess";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidInit: return "InvalidInit";
    case ErrorKind::InvalidThreshold: return "InvalidThreshold";
    case ErrorKind::OutOfSupport: return "OutOfSupport";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::BranchCut: return "BranchCut";
    case ErrorKind::NonConvergentLadder: return "NonConvergentLadder";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qtangent
