#pragma once

#include <optional>
#include <string>

#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"

namespace moodifier::feed {

// Reminder fires once dwell in the negative-only view strictly exceeds this.
inline constexpr Seconds kNegativeDwellLimit{900};

struct ReminderEvent {
  std::string user_id;
  Timestamp at{};
  Seconds dwell{0};
};

// One user's view state. Mutated by one actor at a time.
struct ViewSession {
  std::string user_id;
  ViewMode mode = ViewMode::Original;
  Timestamp mode_entered_at{};
  Seconds negative_dwell{0};  // within the current NegativeOnly stay
  bool reminder_fired = false;  // for the current NegativeOnly stay
  // The blinking pop-up: set when the reminder fires, cleared only when the
  // user returns to the Original view.
  bool reminder_active = false;
  Timestamp last_observed{};
};

ViewSession start_session(std::string user_id, Timestamp now);

// Switches the active view. Returns false when `mode` is already active
// (the current stay continues). Leaving NegativeOnly resets the dwell and
// the fired flag. Throws Error(ClockSkew) if `now` is older than the last
// observed timestamp.
bool switch_mode(ViewSession& session, ViewMode mode, Timestamp now);

// Updates the NegativeOnly dwell and returns a reminder exactly once per
// continuous stay, at the first tick whose dwell exceeds 900 s.
// Throws Error(ClockSkew) if `now` is older than the last observed timestamp.
std::optional<ReminderEvent> tick_dwell(ViewSession& session, Timestamp now);

}  // namespace moodifier::feed
