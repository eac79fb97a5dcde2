#include "moodifier/common/valence.hpp"

namespace moodifier {

std::string_view to_string(Valence v) {
  switch (v) {
    case Valence::Positive: return "positive";
    case Valence::Neutral: return "neutral";
    case Valence::Negative: return "negative";
  }
  return "neutral";
}

std::optional<Valence> parse_valence(std::string_view text) {
  if (text == "positive") return Valence::Positive;
  if (text == "neutral") return Valence::Neutral;
  if (text == "negative") return Valence::Negative;
  return std::nullopt;
}

std::string_view to_string(ViewMode m) {
  switch (m) {
    case ViewMode::Original: return "original";
    case ViewMode::MoodColors: return "mood_colors";
    case ViewMode::PositiveOnly: return "positive_only";
    case ViewMode::NegativeOnly: return "negative_only";
  }
  return "original";
}

std::optional<ViewMode> parse_view_mode(std::string_view text) {
  for (auto m : kAllViewModes) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

}  // namespace moodifier
