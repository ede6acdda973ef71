#include "rasddp/error.hpp"

namespace rasddp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedProgram: return "MalformedProgram";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::NotOptimal: return "NotOptimal";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TreeTooLarge: return "TreeTooLarge";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StageInfeasible: return "StageInfeasible";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::CyclicCascade: return "CyclicCascade";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rasddp
