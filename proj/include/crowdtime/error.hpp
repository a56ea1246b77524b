#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crowdtime {

enum class ErrorKind {
  MalformedRow,
  DuplicateJudgment,
  LabelOutOfRange,
  NonPositiveTime,
  InvalidArgument,
  TaskWithoutJudgments,
  NotBinary,
  InvalidIterationCounts,
  MissingDurationState,
  SingleClassGold,
  EmptyInput,
  MissingGold,
  FractionTooSmall,
  ConfigInvalid,
  UnknownModel,
  Io,
  // numerical failures (CLI exit code 3)
  AllZeroWeights,
  NonPositiveCount,
  EmptyInterval,
  Numerical,
};

std::string_view to_string(ErrorKind kind);

/// True for kinds that indicate a numerical failure rather than bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crowdtime
