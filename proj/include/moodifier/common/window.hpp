#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "moodifier/common/time.hpp"

namespace moodifier {

// Seven-day analysis windows anchored at a participant's install time.
enum class Window { Wm2, Wm1, W0 };

inline constexpr std::array<Window, 3> kAllWindows{Window::Wm2, Window::Wm1, Window::W0};

struct TimeRange {
  Timestamp from;  // inclusive
  Timestamp to;    // exclusive

  bool contains(Timestamp t) const { return from <= t && t < to; }
  bool empty() const { return !(from < to); }
};

TimeRange window_bounds(Timestamp installed_at, Window w);

// The window containing `t`, if any.
std::optional<Window> window_of(Timestamp installed_at, Timestamp t);

std::string_view to_string(Window w);
std::optional<Window> parse_window(std::string_view text);

}  // namespace moodifier
