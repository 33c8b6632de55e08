#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vp {

enum class ErrorCode {
  kInvalidInput,
  kDimMismatch,
  kZeroVector,
  kEmptyList,
  kNonFinite,
  kIo,
  kRaggedMatrix,
  kDuplicateId,
  kCorruptStore,
  kUnsupportedVersion,
  kUnknownId,
  kSchema,
  kConfig,
  kUnboundPlaceholder,
  kBackendUnavailable,
  kEmptyResponse,
  kMissingFixture,
  kDuplicateAssignment,
  kEmbedder,
  kEmptyClassifier,
  kMissingLabel,
  kEmptyGrid,
};

std::string_view error_code_name(ErrorCode code);

// Backend failures are reported with exit code 2 by the CLI; everything
// else is a validation failure.
bool is_backend_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  // Dotted path of the offending field, when the error concerns one.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace vp
