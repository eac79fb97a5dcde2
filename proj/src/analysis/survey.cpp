#include "moodifier/analysis/survey.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::analysis {

std::string_view to_string(SurveyPhase p) { return p == SurveyPhase::Pre ? "pre" : "post"; }

std::optional<SurveyPhase> parse_phase(std::string_view text) {
  if (text == "pre") return SurveyPhase::Pre;
  if (text == "post") return SurveyPhase::Post;
  return std::nullopt;
}

void validate(const SurveyResponse& r) {
  if (r.participant_id.empty()) throw Error(Errc::InvalidSurvey, "survey without participant");
  for (int i = 0; i < kQuestionCount; ++i) {
    const int q = r.questions[static_cast<std::size_t>(i)];
    if (q < 1 || q > 100) {
      throw Error(Errc::InvalidSurvey, fmt::format("q{} = {} is outside 1..100", i + 1, q));
    }
  }
  if (std::find(kEmojiChoices.begin(), kEmojiChoices.end(), r.emoji) == kEmojiChoices.end()) {
    throw Error(Errc::InvalidSurvey, fmt::format("unknown emoji choice '{}'", r.emoji));
  }
  phq8_score(r.phq8);
}

Phq8Score phq8_score(std::span<const int> items) {
  if (items.size() != kPhq8Items) {
    throw Error(Errc::OutOfRangeItem, fmt::format("PHQ-8 needs 8 items, got {}", items.size()));
  }
  Phq8Score s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] < 0 || items[i] > 3) {
      throw Error(Errc::OutOfRangeItem,
                  fmt::format("PHQ-8 item {} = {} is outside 0..3", i + 1, items[i]));
    }
    s.total += items[i];
  }
  s.flagged = s.total >= kPhq8Threshold;
  return s;
}

std::optional<Valence> dominant_valence(const std::array<std::size_t, 3>& counts) {
  const auto best = *std::max_element(counts.begin(), counts.end());
  if (best == 0) return std::nullopt;
  std::optional<Valence> winner;
  for (auto v : kAllValences) {
    if (counts[index_of(v)] != best) continue;
    if (winner) return Valence::Neutral;
    winner = v;
  }
  return winner;
}

double self_report_accuracy(std::span<const StatedValence> responses,
                            const std::map<std::string, Valence, std::less<>>& actual_dominant) {
  if (responses.empty()) throw Error(Errc::InsufficientData, "no self-reports to score");
  std::size_t correct = 0;
  for (const auto& r : responses) {
    const auto it = actual_dominant.find(r.participant_id);
    if (it == actual_dominant.end()) {
      throw Error(Errc::MissingActual,
                  fmt::format("no actual dominant valence for '{}'", r.participant_id));
    }
    if (it->second == r.stated) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(responses.size());
}

}  // namespace moodifier::analysis
