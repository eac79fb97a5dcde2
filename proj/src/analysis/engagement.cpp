#include "moodifier/analysis/engagement.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace moodifier::analysis {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double EngagementMetrics::view_session_share() const { return ratio(view_sessions, sessions); }

double EngagementMetrics::mode_share(ViewMode mode) const {
  std::size_t total = 0;
  for (auto n : activations) total += n;
  return ratio(activations[static_cast<std::size_t>(mode)], total);
}

double EngagementMetrics::daily_displayed_mean() const { return ratio(displayed, participant_days); }

double EngagementMetrics::relabeling_user_share() const { return ratio(relabeling_users, participants); }

double EngagementMetrics::relabel_rate() const { return ratio(relabels, displayed_by_relabelers); }

EngagementMetrics replay_engagement(std::span<const experiment::TelemetryEvent> events,
                                    std::chrono::seconds session_gap) {
  std::map<std::string, std::vector<const experiment::TelemetryEvent*>> by_participant;
  for (const auto& e : events) by_participant[e.participant_id].push_back(&e);

  EngagementMetrics m;
  m.participants = by_participant.size();
  for (auto& [id, list] : by_participant) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto* a, const auto* b) { return std::tie(a->at, a->id) < std::tie(b->at, b->id); });
    std::set<long long> days;
    std::size_t displayed = 0;
    std::size_t relabels = 0;
    bool view_in_session = false;
    std::optional<Timestamp> last;
    for (const auto* e : list) {
      if (!last || e->at - *last > session_gap) {
        ++m.sessions;
        view_in_session = false;
      }
      last = e->at;
      days.insert(std::chrono::floor<std::chrono::days>(e->at).time_since_epoch().count());

      if (const auto* v = std::get_if<experiment::events::ViewActivated>(&e->payload)) {
        if (v->mode != ViewMode::Original) {
          ++m.activations[static_cast<std::size_t>(v->mode)];
          if (!view_in_session) ++m.view_sessions;
          view_in_session = true;
        }
      } else if (const auto* d = std::get_if<experiment::events::PostsDisplayed>(&e->payload)) {
        displayed += static_cast<std::size_t>(std::max(0, d->count));
      } else if (std::holds_alternative<experiment::events::Relabel>(e->payload)) {
        ++relabels;
      } else if (std::holds_alternative<experiment::events::Reminder>(e->payload)) {
        ++m.reminders;
      } else if (std::holds_alternative<experiment::events::StatsViewed>(e->payload)) {
        ++m.stats_views;
      }
    }
    m.participant_days += days.size();
    m.displayed += displayed;
    m.relabels += relabels;
    if (relabels > 0) {
      ++m.relabeling_users;
      m.displayed_by_relabelers += displayed;
    }
  }
  return m;
}

}  // namespace moodifier::analysis
