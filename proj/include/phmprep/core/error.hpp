#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace phmprep {

enum class Errc {
  FileUnreadable,
  MissingTimeColumn,
  DuplicateTimestamp,
  EmptyTable,
  MalformedInput,
  UnknownKind,
  InvertedInterval,
  UnmappedCategory,
  ColumnNotFound,
  UnknownFeature,
  AllColumnsDropped,
  InvertedBounds,
  IoFailure,
  EmptyInput,
  TooFewRows,
  LengthMismatch,
  DegradedEmpty,
  HealthySmallerThanDegraded,
  DegenerateFeature,
  FeatureMismatch,
  SingleClassInput,
  NonFiniteLoss,
  GridEmpty,
  SpaceEmpty,
  MissingValues,
  NonFinite,
  KTooLarge,
  InfeasibleCorrelation,
  ScheduleOverflow,
  InvalidArgument,
  InvalidConfig,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::FileUnreadable: return "FileUnreadable";
    case Errc::MissingTimeColumn: return "MissingTimeColumn";
    case Errc::DuplicateTimestamp: return "DuplicateTimestamp";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::MalformedInput: return "MalformedInput";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::InvertedInterval: return "InvertedInterval";
    case Errc::UnmappedCategory: return "UnmappedCategory";
    case Errc::ColumnNotFound: return "ColumnNotFound";
    case Errc::UnknownFeature: return "UnknownFeature";
    case Errc::AllColumnsDropped: return "AllColumnsDropped";
    case Errc::InvertedBounds: return "InvertedBounds";
    case Errc::IoFailure: return "IoFailure";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegradedEmpty: return "DegradedEmpty";
    case Errc::HealthySmallerThanDegraded: return "HealthySmallerThanDegraded";
    case Errc::DegenerateFeature: return "DegenerateFeature";
    case Errc::FeatureMismatch: return "FeatureMismatch";
    case Errc::SingleClassInput: return "SingleClassInput";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::GridEmpty: return "GridEmpty";
    case Errc::SpaceEmpty: return "SpaceEmpty";
    case Errc::MissingValues: return "MissingValues";
    case Errc::NonFinite: return "NonFinite";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::InfeasibleCorrelation: return "InfeasibleCorrelation";
    case Errc::ScheduleOverflow: return "ScheduleOverflow";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Data-level failure raised by every module. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// An Error re-raised by the pipeline runner with the failing stage attached.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace phmprep
