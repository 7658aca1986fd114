#include "scoreconf/error.hpp"

namespace scoreconf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
  case ErrorCode::kDuplicateBond: return "DuplicateBond";
  case ErrorCode::kSelfLoop: return "SelfLoop";
  case ErrorCode::kAlreadyExtended: return "AlreadyExtended";
  case ErrorCode::kSizeMismatch: return "SizeMismatch";
  case ErrorCode::kTapeMismatch: return "TapeMismatch";
  case ErrorCode::kDomainError: return "DomainError";
  case ErrorCode::kUnknownAtomType: return "UnknownAtomType";
  case ErrorCode::kNonPositiveSigma: return "NonPositiveSigma";
  case ErrorCode::kDegenerateDistance: return "DegenerateDistance";
  case ErrorCode::kInvalidRange: return "InvalidRange";
  case ErrorCode::kEmptyDataset: return "EmptyDataset";
  case ErrorCode::kTooFewAtoms: return "TooFewAtoms";
  case ErrorCode::kEmptySet: return "EmptySet";
  case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
  case ErrorCode::kNonPositiveBandwidth: return "NonPositiveBandwidth";
  case ErrorCode::kInvalidSpec: return "InvalidSpec";
  case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
  case ErrorCode::kParseError: return "ParseError";
  case ErrorCode::kShapeMismatch: return "ShapeMismatch";
  case ErrorCode::kInvalidArgument: return "InvalidArgument";
  case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

} // namespace scoreconf
