#pragma once

#include <stdexcept>
#include <string>

namespace mouseauth {

enum class ErrorCode {
  kSchemaError,
  kEmptySession,
  kNoSessions,
  kTooShort,
  kInvalidDt,
  kTooFewSamples,
  kInvalidBandwidth,
  kEmptyInput,
  kGridMismatch,
  kInvalidArgument,
  kLengthMismatch,
  kOutOfRange,
  kShapeMismatch,
  kLabelOutOfRange,
  kCacheMismatch,
  kSingleClassDataset,
  kEmptySet,
  kSingleClass,
  kInsufficientUsers,
  kInsufficientData,
  kInvalidSpec,
  kInvalidConfig,
  kIoError,
};

const char* error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (CLI, Python bindings) can map it to a machine-readable record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mouseauth
