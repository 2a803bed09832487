#include "vexa/error.hpp"

namespace vexa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::CorpusEmpty: return "CorpusEmpty";
    case ErrorCode::VocabTooSmall: return "VocabTooSmall";
    case ErrorCode::IndexOutOfVocab: return "IndexOutOfVocab";
    case ErrorCode::NonFiniteWeights: return "NonFiniteWeights";
    case ErrorCode::SingleClassCorpus: return "SingleClassCorpus";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::FrozenModel: return "FrozenModel";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::ModelNotFrozen: return "ModelNotFrozen";
    case ErrorCode::ZeroSamples: return "ZeroSamples";
    case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::ConditionMismatch: return "ConditionMismatch";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::BadResponse: return "BadResponse";
    case ErrorCode::ProbabilitySumViolation: return "ProbabilitySumViolation";
    case ErrorCode::EmptyEvidence: return "EmptyEvidence";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::NoLetters: return "NoLetters";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace vexa
