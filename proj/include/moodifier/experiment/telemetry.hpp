#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"

namespace moodifier::experiment {

namespace events {
struct ViewActivated {
  ViewMode mode;
  bool operator==(const ViewActivated&) const = default;
};
struct PostsDisplayed {
  int count = 0;
  bool operator==(const PostsDisplayed&) const = default;
};
struct Relabel {
  std::string post_id;
  std::optional<Valence> from;
  Valence to;
  bool operator==(const Relabel&) const = default;
};
struct StatsViewed {
  bool operator==(const StatsViewed&) const = default;
};
struct Reminder {
  bool operator==(const Reminder&) const = default;
};
}  // namespace events

using EventPayload = std::variant<events::ViewActivated, events::PostsDisplayed, events::Relabel,
                                  events::StatsViewed, events::Reminder>;

struct TelemetryEvent {
  // Empty until the log assigns "<participant>:<seq>"; clients may supply
  // their own id to make batch resubmission idempotent.
  std::string id;
  std::string participant_id;
  Timestamp at{};
  EventPayload payload;

  bool operator==(const TelemetryEvent&) const = default;
};

std::string_view kind_name(const EventPayload& payload);

// Receives feed-engine and experiment events. Implementations reject an
// event whose timestamp precedes the participant's latest one with
// Error(NonMonotonicEvent).
class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  // Returns false when an event with the same id was already recorded.
  virtual bool record(TelemetryEvent event) = 0;
};

// Ordering and id bookkeeping shared by every sink.
class EventSequencer {
 public:
  // Assigns an id when missing. Returns false for an id already admitted;
  // throws Error(NonMonotonicEvent) for an out-of-order timestamp.
  bool admit(TelemetryEvent& event);
  // Registers an already-persisted event without ordering checks.
  void observe(const TelemetryEvent& event);

 private:
  std::map<std::string, Timestamp, std::less<>> latest_;
  std::map<std::string, std::size_t, std::less<>> next_seq_;
  std::set<std::string, std::less<>> seen_ids_;
};

// Append-only in-memory event log.
class TelemetryLog : public TelemetrySink {
 public:
  bool record(TelemetryEvent event) override;
  std::vector<TelemetryEvent> events() const;

 private:
  mutable std::mutex mutex_;
  EventSequencer sequencer_;
  std::vector<TelemetryEvent> events_;
};

}  // namespace moodifier::experiment
