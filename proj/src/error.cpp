#include "semmap/error.hpp"

namespace semmap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::PixelOutOfBounds: return "PixelOutOfBounds";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonMonotonicFrame: return "NonMonotonicFrame";
    case ErrorCode::UnknownKeyframe: return "UnknownKeyframe";
    case ErrorCode::DuplicateKeyframe: return "DuplicateKeyframe";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::PointBehindCamera: return "PointBehindCamera";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NegativeDt: return "NegativeDt";
    case ErrorCode::ClockWentBackwards: return "ClockWentBackwards";
    case ErrorCode::FrameOutOfRange: return "FrameOutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace semmap
