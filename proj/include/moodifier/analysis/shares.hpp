#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "moodifier/common/post.hpp"
#include "moodifier/common/valence.hpp"
#include "moodifier/common/window.hpp"

namespace moodifier::analysis {

// Percentages of one user's posts in one window.
struct ShareVector {
  std::array<double, 3> percent{};  // indexed by index_of(Valence)
  std::size_t n_posts = 0;

  double of(Valence v) const { return percent[index_of(v)]; }
};

struct LabeledPost {
  std::string post_id;
  Timestamp created_at{};
  bool is_protected = false;
  std::optional<Valence> label;
};

// Shares over the non-protected posts created inside `bounds`; nullopt when
// there are none. Throws Error(UnlabeledPost) for an in-range non-protected
// post without a label.
std::optional<ShareVector> compute_shares(std::span<const LabeledPost> posts, const TimeRange& bounds);

struct GroupSummary {
  std::string group;
  Window window = Window::W0;
  std::array<double, 3> mean{};
  std::array<double, 3> sd{};  // sample standard deviation (n - 1)
  std::size_t users = 0;
  std::size_t posts = 0;

  double mean_of(Valence v) const { return mean[index_of(v)]; }
  double sd_of(Valence v) const { return sd[index_of(v)]; }
};

// Per-valence mean and sample standard deviation with every user weighted
// equally. Throws Error(InsufficientData) for fewer than two vectors.
GroupSummary group_summary(std::span<const ShareVector> shares, std::string group, Window window);

// Tweet-pooled alternative: one share vector over all posts of the group.
// The sd fields hold the per-user sample standard deviation as above.
GroupSummary pooled_summary(std::span<const ShareVector> shares, std::string group, Window window);

}  // namespace moodifier::analysis
