#include "hipnav/errors.hpp"

namespace hipnav {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::FrameMismatch: return "frame-mismatch";
    case ErrorCode::DegenerateAxis: return "degenerate-axis";
    case ErrorCode::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::RegistrationExhausted: return "registration-exhausted";
    case ErrorCode::EmptyCloud: return "empty-cloud";
    case ErrorCode::DegenerateFit: return "degenerate-fit";
    case ErrorCode::CollinearPoints: return "collinear-points";
    case ErrorCode::AmbiguousMatch: return "ambiguous-match";
    case ErrorCode::SizeMismatch: return "size-mismatch";
    case ErrorCode::InsufficientPairs: return "insufficient-pairs";
    case ErrorCode::UnknownBody: return "unknown-body";
    case ErrorCode::ClusterCountMismatch: return "cluster-count-mismatch";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::OutOfOrderSample: return "out-of-order-sample";
    case ErrorCode::TransitionFromTerminal: return "transition-from-terminal";
    case ErrorCode::IllegalReset: return "illegal-reset";
    case ErrorCode::ConfigParse: return "config-parse";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace hipnav
