#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"

namespace moodifier::analysis {

enum class SurveyPhase { Pre, Post };

std::string_view to_string(SurveyPhase p);
std::optional<SurveyPhase> parse_phase(std::string_view text);

// Answers to "the emoji that best describes how scrolling makes you feel".
inline constexpr std::array<std::string_view, 6> kEmojiChoices{
    "grinning", "smiling", "neutral", "confused", "sad", "angry"};

inline constexpr int kQuestionCount = 7;
inline constexpr int kPhq8Items = 8;
inline constexpr int kPhq8Threshold = 10;

struct SurveyResponse {
  std::string participant_id;
  SurveyPhase phase = SurveyPhase::Pre;
  Timestamp submitted_at{};
  std::array<int, kQuestionCount> questions{};  // Q1..Q7, each 1..100
  std::string emoji;
  // "Most of my Tweets are emotionally ..." / "... my friends' Tweets ..."
  std::optional<Valence> own_valence;
  std::optional<Valence> friends_valence;
  std::array<int, kPhq8Items> phq8{};  // each 0..3
  std::string free_text;

  bool operator==(const SurveyResponse&) const = default;
};

// Throws Error(InvalidSurvey) for out-of-range answers or an unknown emoji
// and Error(OutOfRangeItem) for PHQ-8 items outside 0..3.
void validate(const SurveyResponse& response);

struct Phq8Score {
  int total = 0;
  bool flagged = false;  // total >= 10
};

// Throws Error(OutOfRangeItem) unless there are exactly 8 items in 0..3.
Phq8Score phq8_score(std::span<const int> items);

// Modal valence of a count vector indexed by index_of(Valence); any tie for
// the maximum resolves to Neutral. nullopt when all counts are zero.
std::optional<Valence> dominant_valence(const std::array<std::size_t, 3>& counts);

struct StatedValence {
  std::string participant_id;
  Valence stated = Valence::Neutral;
};

// Fraction of statements equal to the participant's actual dominant valence.
// Throws Error(MissingActual) when a participant has no actual value and
// Error(InsufficientData) for an empty input.
double self_report_accuracy(std::span<const StatedValence> responses,
                            const std::map<std::string, Valence, std::less<>>& actual_dominant);

}  // namespace moodifier::analysis
