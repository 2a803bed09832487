#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vexa {

enum class ErrorCode {
  // corpus
  MissingField,
  InvalidLabel,
  InsufficientData,
  MissingPrediction,
  DuplicateId,
  // detector
  CorpusEmpty,
  VocabTooSmall,
  IndexOutOfVocab,
  NonFiniteWeights,
  SingleClassCorpus,
  LengthMismatch,
  FrozenModel,
  BadCheckpoint,
  // attribution
  ModelNotFrozen,
  ZeroSamples,
  AlignmentMismatch,
  // persona
  UnknownLevel,
  // generation / transport
  ConditionMismatch,
  AuthError,
  RateLimited,
  EmptyCompletion,
  Timeout,
  Transport,
  BadResponse,
  // evaluation
  ProbabilitySumViolation,
  EmptyEvidence,
  EmptyText,
  NoLetters,
  EmptyGroup,
  // plumbing
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception. `stage` is filled
// in by the pipeline when an error crosses a stage boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(ErrorCode code, std::string stage, const std::string& message)
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace vexa
