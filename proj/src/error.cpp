#include "livqual/error.hpp"

namespace livqual {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::IoError: return "IoError";
  case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  case ErrorCode::ImageTooSmall: return "ImageTooSmall";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::EmptyForeground: return "EmptyForeground";
  case ErrorCode::ForegroundTooSmall: return "ForegroundTooSmall";
  case ErrorCode::NoComparableBlocks: return "NoComparableBlocks";
  case ErrorCode::InsufficientSamples: return "InsufficientSamples";
  case ErrorCode::EmptyMask: return "EmptyMask";
  case ErrorCode::ModelDimensionMismatch: return "ModelDimensionMismatch";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::SingleClassInput: return "SingleClassInput";
  case ErrorCode::MissingAttribute: return "MissingAttribute";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

} // namespace livqual
