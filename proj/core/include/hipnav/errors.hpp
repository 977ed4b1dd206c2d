#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hipnav {

enum class ErrorCode {
  InvalidArgument,
  FrameMismatch,
  DegenerateAxis,
  DegenerateConfiguration,
  RegistrationExhausted,
  EmptyCloud,
  DegenerateFit,
  CollinearPoints,
  AmbiguousMatch,
  SizeMismatch,
  InsufficientPairs,
  UnknownBody,
  ClusterCountMismatch,
  NonConvergence,
  OutOfOrderSample,
  TransitionFromTerminal,
  IllegalReset,
  ConfigParse,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace hipnav
