#pragma once

#include <stdexcept>
#include <string>

namespace meshcorr {

enum class ErrorCode {
  EmptySurface,
  InvalidTransform,
  InvalidMesh,
  ShapeMismatch,
  EmptySegment,
  NonScalarLoss,
  MissingPatches,
  TooFewSamples,
  TooFewPatients,
  DegenerateSource,
  EmptyInput,
  IOFailure,
  NanAbort,
  BadConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Validation failures (bad inputs, malformed files) exit the CLI with 2,
// runtime aborts (NaN loss, I/O mid-run) with 3.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IOFailure:
    case ErrorCode::NanAbort:
      return 3;
    default:
      return 2;
  }
}

}  // namespace meshcorr
