#pragma once

#include <stdexcept>
#include <string>

namespace hypoloop {

enum class ErrorCode {
  // belief
  EmptyHypothesisSet,
  AllZeroScores,
  DegenerateEvidence,
  OutOfRange,
  InvalidWeights,
  InvalidDistribution,
  // proposal
  ProviderError,
  TooFewCandidates,
  EmptyInput,
  DimensionMismatch,
  KTooLarge,
  // evidence
  EmbedderError,
  EmptyCorpus,
  EmptyStore,
  EmptyEvidence,
  CorruptStore,
  // refinement
  UnknownTarget,
  // providers
  ParseError,
  UnknownTemplate,
  MissingSlot,
  InvalidStrategy,
  ScriptExhausted,
  // pipeline
  CorruptCheckpoint,
  EmptyState,
  IoError,
};

const char* error_code_name(ErrorCode code);

struct Error : std::runtime_error {
  ErrorCode code;

  Error(ErrorCode code_, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code_)) + ": " + message), code(code_) {}
};

}  // namespace hypoloop
