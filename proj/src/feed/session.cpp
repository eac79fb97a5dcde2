#include "moodifier/feed/session.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::feed {

namespace {

void observe(ViewSession& s, Timestamp now) {
  if (now < s.last_observed) {
    throw Error(Errc::ClockSkew, fmt::format("tick at {} precedes last observation {}",
                                             format_timestamp(now),
                                             format_timestamp(s.last_observed)));
  }
  s.last_observed = now;
}

}  // namespace

ViewSession start_session(std::string user_id, Timestamp now) {
  ViewSession s;
  s.user_id = std::move(user_id);
  s.mode_entered_at = now;
  s.last_observed = now;
  return s;
}

bool switch_mode(ViewSession& session, ViewMode mode, Timestamp now) {
  observe(session, now);
  if (mode == session.mode) return false;
  if (session.mode == ViewMode::NegativeOnly) {
    session.negative_dwell = Seconds{0};
    session.reminder_fired = false;
  }
  if (mode == ViewMode::Original) session.reminder_active = false;
  session.mode = mode;
  session.mode_entered_at = now;
  return true;
}

std::optional<ReminderEvent> tick_dwell(ViewSession& session, Timestamp now) {
  observe(session, now);
  if (session.mode != ViewMode::NegativeOnly) return std::nullopt;
  session.negative_dwell = now - session.mode_entered_at;
  if (session.reminder_fired || session.negative_dwell <= kNegativeDwellLimit) return std::nullopt;
  session.reminder_fired = true;
  session.reminder_active = true;
  return ReminderEvent{session.user_id, now, session.negative_dwell};
}

}  // namespace moodifier::feed
