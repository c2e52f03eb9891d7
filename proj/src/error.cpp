#include "mouseauth/error.hpp"

namespace mouseauth {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kEmptySession: return "EmptySession";
    case ErrorCode::kNoSessions: return "NoSessions";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kInvalidDt: return "InvalidDt";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kInvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kCacheMismatch: return "CacheMismatch";
    case ErrorCode::kSingleClassDataset: return "SingleClassDataset";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kInsufficientUsers: return "InsufficientUsers";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mouseauth
