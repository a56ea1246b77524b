#include "crowdtime/error.hpp"

namespace crowdtime {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateJudgment: return "DuplicateJudgment";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NonPositiveTime: return "NonPositiveTime";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TaskWithoutJudgments: return "TaskWithoutJudgments";
    case ErrorKind::NotBinary: return "NotBinary";
    case ErrorKind::InvalidIterationCounts: return "InvalidIterationCounts";
    case ErrorKind::MissingDurationState: return "MissingDurationState";
    case ErrorKind::SingleClassGold: return "SingleClassGold";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingGold: return "MissingGold";
    case ErrorKind::FractionTooSmall: return "FractionTooSmall";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::AllZeroWeights: return "AllZeroWeights";
    case ErrorKind::NonPositiveCount: return "NonPositiveCount";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::Numerical: return "NumericalFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::AllZeroWeights || kind == ErrorKind::NonPositiveCount ||
         kind == ErrorKind::EmptyInterval || kind == ErrorKind::Numerical;
}

}  // namespace crowdtime
