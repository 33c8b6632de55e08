#include "core/errors.hpp"

namespace vp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kRaggedMatrix: return "RaggedMatrix";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kCorruptStore: return "CorruptStore";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kUnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kEmptyResponse: return "EmptyResponse";
    case ErrorCode::kMissingFixture: return "MissingFixture";
    case ErrorCode::kDuplicateAssignment: return "DuplicateAssignment";
    case ErrorCode::kEmbedder: return "EmbedderError";
    case ErrorCode::kEmptyClassifier: return "EmptyClassifier";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
  }
  return "Unknown";
}

bool is_backend_failure(ErrorCode code) {
  return code == ErrorCode::kBackendUnavailable ||
         code == ErrorCode::kEmptyResponse || code == ErrorCode::kEmbedder;
}

}  // namespace vp
