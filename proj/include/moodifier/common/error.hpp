#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace moodifier {

enum class Errc {
  // sentiment
  EmptyCorpus,
  SingleClassCorpus,
  InvalidTau,
  InvalidLexicon,
  ModelFormat,
  // feed
  OverrideOnProtected,
  ClockSkew,
  UnknownPost,
  // experiment
  AlreadyEnrolled,
  UnknownParticipant,
  CohortAlreadySampled,
  StatsNotAvailable,
  InvalidMixture,
  InvalidPeriod,
  NonMonotonicEvent,
  // ingest / store
  SourceUnavailable,
  RateLimited,
  InvalidRange,
  CorruptRecord,
  PrivacyViolation,
  Io,
  // analysis
  InsufficientData,
  DegenerateVariance,
  LengthMismatch,
  NonFiniteValue,
  OutOfRangeItem,
  InvalidSurvey,
  MissingActual,
  UnlabeledPost,
  EmptyStore,
  // gateway
  BindFailure,
  ModelLoadFailure,
  InvalidArgument,
  NotYetAvailable,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class RateLimitedError : public Error {
 public:
  explicit RateLimitedError(std::chrono::seconds retry_after);

  std::chrono::seconds retry_after() const noexcept { return retry_after_; }

 private:
  std::chrono::seconds retry_after_;
};

class CorruptRecordError : public Error {
 public:
  CorruptRecordError(std::size_t line, const std::string& detail);

  // 1-based line number of the offending record.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace moodifier
