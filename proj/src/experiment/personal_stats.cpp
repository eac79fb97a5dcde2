#include "moodifier/experiment/personal_stats.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::experiment {

PersonalStats personal_stats(const Participant& p, std::span<const feed::AnnotatedPost> own_posts,
                             const TimeRange& period) {
  if (p.group != TreatmentGroup::T1) {
    throw Error(Errc::StatsNotAvailable,
                fmt::format("personal statistics are not available to '{}'", p.id));
  }
  if (period.empty()) throw Error(Errc::InvalidPeriod, "statistics period is empty");

  PersonalStats stats;
  stats.period = period;
  for (const auto& a : own_posts) {
    if (a.post.author_id != p.id || !period.contains(a.post.created_at)) continue;
    const auto v = a.effective();
    if (!v) continue;
    ++stats.counts[index_of(*v)];
    ++stats.total;
  }
  stats.empty = stats.total == 0;
  if (!stats.empty) {
    for (std::size_t k = 0; k < 3; ++k) {
      stats.percent[k] = 100.0 * static_cast<double>(stats.counts[k]) / static_cast<double>(stats.total);
    }
  }
  return stats;
}

}  // namespace moodifier::experiment
