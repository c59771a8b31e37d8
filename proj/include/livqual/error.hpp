#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace livqual {

enum class ErrorCode {
  InvalidArgument,
  IoError,
  UnsupportedFormat,
  ImageTooSmall,
  ParseError,
  EmptyForeground,
  ForegroundTooSmall,
  NoComparableBlocks,
  InsufficientSamples,
  EmptyMask,
  ModelDimensionMismatch,
  LengthMismatch,
  SingleClassInput,
  MissingAttribute,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` carries the error name the
/// CLI reports.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace livqual
