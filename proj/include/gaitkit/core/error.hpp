#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitkit {

enum class ErrorCode {
  MalformedDocument,
  NoPersonDetected,
  MultiplePersons,
  WrongTripleCount,
  FrameGap,
  EmptyInput,
  InvalidArgument,
  ImageTooSmall,
  EmptyJob,
  DuplicateOutput,
  Io,
  BackendFailed,
  BackendTimeout,
  EmptySeries,
  SpanTooShort,
  SwapSeedNotFound,
  TooFewFrames,
  DirectionAmbiguous,
  DegenerateSegment,
  ViewUnsupported,
  NonMonotonicEvents,
  NoEvents,
  UnknownEventField,
  InsufficientEvents,
  CycleRejected,
  NoCycles,
  MismatchedStructure,
  NoJointSamples,
  OutOfBounds,
  MissingGroundTruth,
  Config,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::NoPersonDetected: return "NoPersonDetected";
    case ErrorCode::MultiplePersons: return "MultiplePersons";
    case ErrorCode::WrongTripleCount: return "WrongTripleCount";
    case ErrorCode::FrameGap: return "FrameGap";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyJob: return "EmptyJob";
    case ErrorCode::DuplicateOutput: return "DuplicateOutput";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BackendFailed: return "BackendFailed";
    case ErrorCode::BackendTimeout: return "BackendTimeout";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::SpanTooShort: return "SpanTooShort";
    case ErrorCode::SwapSeedNotFound: return "SwapSeedNotFound";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::DirectionAmbiguous: return "DirectionAmbiguous";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::ViewUnsupported: return "ViewUnsupported";
    case ErrorCode::NonMonotonicEvents: return "NonMonotonicEvents";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::UnknownEventField: return "UnknownEventField";
    case ErrorCode::InsufficientEvents: return "InsufficientEvents";
    case ErrorCode::CycleRejected: return "CycleRejected";
    case ErrorCode::NoCycles: return "NoCycles";
    case ErrorCode::MismatchedStructure: return "MismatchedStructure";
    case ErrorCode::NoJointSamples: return "NoJointSamples";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit. The code is stable and meant for
/// programmatic matching; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaitkit
