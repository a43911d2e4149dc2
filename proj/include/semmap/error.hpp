#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semmap {

enum class ErrorCode {
  NonPositiveDepth,
  InvalidDepth,
  PixelOutOfBounds,
  EmptyCloud,
  FrameMismatch,
  InvalidArgument,
  NonMonotonicFrame,
  UnknownKeyframe,
  DuplicateKeyframe,
  ClassMismatch,
  PointBehindCamera,
  DegenerateConfiguration,
  NoConvergence,
  NegativeDt,
  ClockWentBackwards,
  FrameOutOfRange,
  ConfigError,
  SchemaError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace semmap
