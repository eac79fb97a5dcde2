#include "moodifier/analysis/shares.hpp"

#include <cmath>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::analysis {

std::optional<ShareVector> compute_shares(std::span<const LabeledPost> posts, const TimeRange& bounds) {
  std::array<std::size_t, 3> counts{};
  std::size_t n = 0;
  for (const auto& p : posts) {
    if (p.is_protected || !bounds.contains(p.created_at)) continue;
    if (!p.label) throw Error(Errc::UnlabeledPost, fmt::format("post '{}' has no label", p.post_id));
    ++counts[index_of(*p.label)];
    ++n;
  }
  if (n == 0) return std::nullopt;
  ShareVector s;
  s.n_posts = n;
  for (std::size_t k = 0; k < 3; ++k) {
    s.percent[k] = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(n);
  }
  return s;
}

GroupSummary group_summary(std::span<const ShareVector> shares, std::string group, Window window) {
  if (shares.size() < 2) {
    throw Error(Errc::InsufficientData,
                fmt::format("{} {}: {} user(s), need at least 2", group, to_string(window), shares.size()));
  }
  GroupSummary g;
  g.group = std::move(group);
  g.window = window;
  g.users = shares.size();
  const double n = static_cast<double>(shares.size());
  for (const auto& s : shares) g.posts += s.n_posts;
  for (std::size_t k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (const auto& s : shares) sum += s.percent[k];
    g.mean[k] = sum / n;
    double ss = 0.0;
    for (const auto& s : shares) ss += (s.percent[k] - g.mean[k]) * (s.percent[k] - g.mean[k]);
    g.sd[k] = std::sqrt(ss / (n - 1.0));
  }
  return g;
}

GroupSummary pooled_summary(std::span<const ShareVector> shares, std::string group, Window window) {
  auto g = group_summary(shares, std::move(group), window);
  std::array<double, 3> counts{};
  for (const auto& s : shares) {
    for (std::size_t k = 0; k < 3; ++k) counts[k] += s.percent[k] * static_cast<double>(s.n_posts) / 100.0;
  }
  for (std::size_t k = 0; k < 3; ++k) g.mean[k] = 100.0 * counts[k] / static_cast<double>(g.posts);
  return g;
}

}  // namespace moodifier::analysis
