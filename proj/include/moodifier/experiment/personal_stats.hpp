#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "moodifier/common/window.hpp"
#include "moodifier/experiment/participant.hpp"
#include "moodifier/feed/annotate.hpp"

namespace moodifier::experiment {

// Valence breakdown of a participant's own posts, shown only to T1.
struct PersonalStats {
  TimeRange period;
  std::array<std::size_t, 3> counts{};  // indexed by index_of(Valence)
  std::array<double, 3> percent{};      // 0/0/0 when empty
  std::size_t total = 0;
  bool empty = true;
};

// Counts effective valences of `own_posts` authored by `p` within `period`
// (protected posts carry no valence and are skipped).
// Throws Error(StatsNotAvailable) for T2 participants and
// Error(InvalidPeriod) for an empty period.
PersonalStats personal_stats(const Participant& p, std::span<const feed::AnnotatedPost> own_posts,
                             const TimeRange& period);

}  // namespace moodifier::experiment
