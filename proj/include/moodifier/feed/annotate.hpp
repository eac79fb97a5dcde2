#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "moodifier/common/post.hpp"
#include "moodifier/common/valence.hpp"
#include "moodifier/sentiment/model.hpp"

namespace moodifier::feed {

// One user's relabels, keyed by post id.
using OverrideMap = std::unordered_map<std::string, Valence>;

struct AnnotatedPost {
  Post post;
  std::optional<Valence> machine;         // absent iff the post is protected
  std::optional<Valence> override_label;  // this user's relabel, if any
  double log_odds = 0.0;

  // Override if present, else the machine label; absent for protected posts.
  std::optional<Valence> effective() const {
    if (post.is_protected) return std::nullopt;
    return override_label ? override_label : machine;
  }
};

// Classifies every non-protected post (body plus any quoted commentary) and
// attaches the user's overrides. Protected posts are never read by the
// classifier. Throws Error(OverrideOnProtected) if an override targets a
// protected post in the list.
std::vector<AnnotatedPost> annotate(const sentiment::SentimentModel& model,
                                    std::span<const Post> posts, const OverrideMap& overrides);

enum class ColorTag { None, Green, Red };

std::string_view to_string(ColorTag tag);

struct DisplayItem {
  AnnotatedPost entry;
  ColorTag color = ColorTag::None;
};

// Original: everything, untagged. MoodColors: everything, green/red/none by
// effective valence. PositiveOnly / NegativeOnly: only items whose effective
// valence matches (protected posts never match). Input order is kept.
std::vector<DisplayItem> apply_view(std::span<const AnnotatedPost> annotated, ViewMode mode);
std::vector<DisplayItem> apply_view(std::span<const DisplayItem> items, ViewMode mode);

}  // namespace moodifier::feed
