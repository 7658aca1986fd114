#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scoreconf {

enum class ErrorCode {
  kIndexOutOfRange,
  kDuplicateBond,
  kSelfLoop,
  kAlreadyExtended,
  kSizeMismatch,
  kTapeMismatch,
  kDomainError,
  kUnknownAtomType,
  kNonPositiveSigma,
  kDegenerateDistance,
  kInvalidRange,
  kEmptyDataset,
  kTooFewAtoms,
  kEmptySet,
  kDimensionMismatch,
  kNonPositiveBandwidth,
  kInvalidSpec,
  kIncompatibleCheckpoint,
  kParseError,
  kShapeMismatch,
  kInvalidArgument,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace scoreconf
