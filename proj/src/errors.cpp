#include "hypoloop/errors.hpp"

namespace hypoloop {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyHypothesisSet: return "EmptyHypothesisSet";
    case ErrorCode::AllZeroScores: return "AllZeroScores";
    case ErrorCode::DegenerateEvidence: return "DegenerateEvidence";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmbedderError: return "EmbedderError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::EmptyEvidence: return "EmptyEvidence";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::EmptyState: return "EmptyState";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace hypoloop
