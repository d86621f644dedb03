#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace litho {

enum class ErrorCode {
  // video-io
  EmptyVideo,
  TooSmall,
  CorruptManifest,
  DimensionMismatch,
  MissingFrame,
  Io,
  // phantom-gen
  InvalidSpec,
  // segmentation
  NoTruthAvailable,
  NotCalibrated,
  ParamOutOfRange,
  // classify
  MissingClass,
  EmptyMaskSample,
  EmptyMask,
  NotTrained,
  MalformedRow,
  ScoreSumViolation,
  UnknownClass,
  // esr-decision
  EmptyList,
  // eval
  NoPositives,
  EmptyGroup,
  MissingTruth,
  // generic argument validation
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Data or contract error raised by every litho module. The code is stable
/// and meant for programmatic handling; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an internal invariant is broken (a bug, not bad input).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace litho
