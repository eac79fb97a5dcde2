#include "moodifier/common/error.hpp"

#include <fmt/format.h>

namespace moodifier {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyCorpus: return "empty_corpus";
    case Errc::SingleClassCorpus: return "single_class_corpus";
    case Errc::InvalidTau: return "invalid_tau";
    case Errc::InvalidLexicon: return "invalid_lexicon";
    case Errc::ModelFormat: return "model_format";
    case Errc::OverrideOnProtected: return "override_on_protected";
    case Errc::ClockSkew: return "clock_skew";
    case Errc::UnknownPost: return "unknown_post";
    case Errc::AlreadyEnrolled: return "already_enrolled";
    case Errc::UnknownParticipant: return "unknown_participant";
    case Errc::CohortAlreadySampled: return "cohort_already_sampled";
    case Errc::StatsNotAvailable: return "stats_not_available";
    case Errc::InvalidMixture: return "invalid_mixture";
    case Errc::InvalidPeriod: return "invalid_period";
    case Errc::NonMonotonicEvent: return "non_monotonic_event";
    case Errc::SourceUnavailable: return "source_unavailable";
    case Errc::RateLimited: return "rate_limited";
    case Errc::InvalidRange: return "invalid_range";
    case Errc::CorruptRecord: return "corrupt_record";
    case Errc::PrivacyViolation: return "privacy_violation";
    case Errc::Io: return "io";
    case Errc::InsufficientData: return "insufficient_data";
    case Errc::DegenerateVariance: return "degenerate_variance";
    case Errc::LengthMismatch: return "length_mismatch";
    case Errc::NonFiniteValue: return "non_finite_value";
    case Errc::OutOfRangeItem: return "out_of_range_item";
    case Errc::InvalidSurvey: return "invalid_survey";
    case Errc::MissingActual: return "missing_actual";
    case Errc::UnlabeledPost: return "unlabeled_post";
    case Errc::EmptyStore: return "empty_store";
    case Errc::BindFailure: return "bind_failure";
    case Errc::ModelLoadFailure: return "model_load_failure";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::NotYetAvailable: return "not_yet_available";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

RateLimitedError::RateLimitedError(std::chrono::seconds retry_after)
    : Error(Errc::RateLimited,
            fmt::format("rate limited, retry after {}s", retry_after.count())),
      retry_after_(retry_after) {}

CorruptRecordError::CorruptRecordError(std::size_t line, const std::string& detail)
    : Error(Errc::CorruptRecord, fmt::format("corrupt record at line {}: {}", line, detail)),
      line_(line) {}

}  // namespace moodifier
