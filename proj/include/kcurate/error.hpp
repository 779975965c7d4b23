#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kcurate {

enum class ErrorCode {
  EmptyText,
  DuplicateId,
  OrphanSubdomain,
  InvalidDocument,
  SingleClass,
  EmptyTrainingSet,
  FeatureSpecMismatch,
  UntrainedModel,
  EmptyCorpus,
  CorpusTooSmall,
  SampleTooSmall,
  InvalidArgument,
  DuplicateName,
  MissingSkeleton,
  EmptyCandidatePool,
  EmptyDocument,
  JudgeOutOfRange,
  AnalysisFailed,
  GenerationFailed,
  AlreadySynthetic,
  UnboundVariable,
  IncompleteAudit,
  ConfigInvalid,
  IoError,
  FormatError,
  TransportError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::OrphanSubdomain: return "OrphanSubdomain";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::FeatureSpecMismatch: return "FeatureSpecMismatch";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::MissingSkeleton: return "MissingSkeleton";
    case ErrorCode::EmptyCandidatePool: return "EmptyCandidatePool";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::JudgeOutOfRange: return "JudgeOutOfRange";
    case ErrorCode::AnalysisFailed: return "AnalysisFailed";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::AlreadySynthetic: return "AlreadySynthetic";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::IncompleteAudit: return "IncompleteAudit";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::TransportError: return "TransportError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kcurate
