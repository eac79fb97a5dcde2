#include "moodifier/common/window.hpp"

namespace moodifier {

TimeRange window_bounds(Timestamp installed_at, Window w) {
  switch (w) {
    case Window::Wm2: return {installed_at - days(14), installed_at - days(7)};
    case Window::Wm1: return {installed_at - days(7), installed_at};
    case Window::W0: return {installed_at, installed_at + days(7)};
  }
  return {installed_at, installed_at};
}

std::optional<Window> window_of(Timestamp installed_at, Timestamp t) {
  for (auto w : kAllWindows) {
    if (window_bounds(installed_at, w).contains(t)) return w;
  }
  return std::nullopt;
}

std::string_view to_string(Window w) {
  switch (w) {
    case Window::Wm2: return "W-2";
    case Window::Wm1: return "W-1";
    case Window::W0: return "W0";
  }
  return "W0";
}

std::optional<Window> parse_window(std::string_view text) {
  for (auto w : kAllWindows) {
    if (to_string(w) == text) return w;
  }
  return std::nullopt;
}

}  // namespace moodifier
