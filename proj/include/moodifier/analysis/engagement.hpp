#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <span>

#include "moodifier/experiment/telemetry.hpp"

namespace moodifier::analysis {

inline constexpr std::chrono::minutes kDefaultSessionGap{30};

// Usage figures replayed from the telemetry stream. A session is a run of
// one participant's events with no gap longer than the session gap.
struct EngagementMetrics {
  std::size_t participants = 0;  // participants with any event
  std::size_t sessions = 0;
  std::size_t view_sessions = 0;  // sessions with a non-Original activation
  std::array<std::size_t, 4> activations{};  // by ViewMode; Original excluded
  std::size_t displayed = 0;
  std::size_t participant_days = 0;  // distinct (participant, UTC day) with events
  std::size_t relabels = 0;
  std::size_t relabeling_users = 0;
  std::size_t displayed_by_relabelers = 0;
  std::size_t reminders = 0;
  std::size_t stats_views = 0;

  double view_session_share() const;
  // Share of non-Original activations that chose `mode`.
  double mode_share(ViewMode mode) const;
  double daily_displayed_mean() const;
  double relabeling_user_share() const;
  // Relabels per displayed post, among participants who relabeled at all.
  double relabel_rate() const;
};

EngagementMetrics replay_engagement(std::span<const experiment::TelemetryEvent> events,
                                    std::chrono::seconds session_gap = kDefaultSessionGap);

}  // namespace moodifier::analysis
