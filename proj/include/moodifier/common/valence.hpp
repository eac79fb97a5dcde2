#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace moodifier {

// Coarse emotional polarity. The enumerator order is used for indexing
// fixed-size per-valence arrays and carries no semantic ordering.
enum class Valence { Positive = 0, Neutral = 1, Negative = 2 };

inline constexpr std::array<Valence, 3> kAllValences{Valence::Positive, Valence::Neutral,
                                                     Valence::Negative};

constexpr std::size_t index_of(Valence v) { return static_cast<std::size_t>(v); }

std::string_view to_string(Valence v);
std::optional<Valence> parse_valence(std::string_view text);

// Exactly one active per view session.
enum class ViewMode { Original, MoodColors, PositiveOnly, NegativeOnly };

inline constexpr std::array<ViewMode, 4> kAllViewModes{ViewMode::Original, ViewMode::MoodColors,
                                                       ViewMode::PositiveOnly,
                                                       ViewMode::NegativeOnly};

std::string_view to_string(ViewMode m);
std::optional<ViewMode> parse_view_mode(std::string_view text);

}  // namespace moodifier
