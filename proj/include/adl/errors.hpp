#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adl {

enum class ErrorKind {
  InvalidInput,
  NotInvertible,
  NotExpansive,
  Overflow,
  SlowConvergence,
  EnvelopeViolation,
  WindowTooLarge,
  Unsaturated,
  NonIntegerTarget,
  DominationViolation,
  PreconditionViolation,
  SupportEscapesWindow,
  ParseError,
  CertificateFailure,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::NotExpansive: return "NotExpansive";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SlowConvergence: return "SlowConvergence";
    case ErrorKind::EnvelopeViolation: return "EnvelopeViolation";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::Unsaturated: return "Unsaturated";
    case ErrorKind::NonIntegerTarget: return "NonIntegerTarget";
    case ErrorKind::DominationViolation: return "DominationViolation";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::SupportEscapesWindow: return "SupportEscapesWindow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CertificateFailure: return "CertificateFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace adl
