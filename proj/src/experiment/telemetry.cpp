#include "moodifier/experiment/telemetry.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::experiment {

std::string_view kind_name(const EventPayload& payload) {
  struct Visitor {
    std::string_view operator()(const events::ViewActivated&) const { return "view_activated"; }
    std::string_view operator()(const events::PostsDisplayed&) const { return "posts_displayed"; }
    std::string_view operator()(const events::Relabel&) const { return "relabel"; }
    std::string_view operator()(const events::StatsViewed&) const { return "stats_viewed"; }
    std::string_view operator()(const events::Reminder&) const { return "reminder"; }
  };
  return std::visit(Visitor{}, payload);
}

bool EventSequencer::admit(TelemetryEvent& event) {
  if (!event.id.empty() && seen_ids_.contains(event.id)) return false;

  const auto latest = latest_.find(event.participant_id);
  if (latest != latest_.end() && event.at < latest->second) {
    throw Error(Errc::NonMonotonicEvent,
                fmt::format("event for '{}' at {} precedes {}", event.participant_id,
                            format_timestamp(event.at), format_timestamp(latest->second)));
  }
  auto& seq = next_seq_[event.participant_id];
  if (event.id.empty()) {
    do {
      event.id = fmt::format("{}:{:06}", event.participant_id, seq++);
    } while (seen_ids_.contains(event.id));
  }
  seen_ids_.insert(event.id);
  latest_.insert_or_assign(event.participant_id, event.at);
  return true;
}

void EventSequencer::observe(const TelemetryEvent& event) {
  seen_ids_.insert(event.id);
  auto [it, inserted] = latest_.try_emplace(event.participant_id, event.at);
  if (!inserted && it->second < event.at) it->second = event.at;
}

bool TelemetryLog::record(TelemetryEvent event) {
  std::lock_guard lock(mutex_);
  if (!sequencer_.admit(event)) return false;
  events_.push_back(std::move(event));
  return true;
}

std::vector<TelemetryEvent> TelemetryLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

}  // namespace moodifier::experiment
