#include "moodifier/feed/annotate.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::feed {

std::string_view to_string(ColorTag tag) {
  switch (tag) {
    case ColorTag::None: return "none";
    case ColorTag::Green: return "green";
    case ColorTag::Red: return "red";
  }
  return "none";
}

std::vector<AnnotatedPost> annotate(const sentiment::SentimentModel& model,
                                    std::span<const Post> posts, const OverrideMap& overrides) {
  for (const auto& post : posts) {
    if (post.is_protected && overrides.contains(post.id)) {
      throw Error(Errc::OverrideOnProtected,
                  fmt::format("override references protected post '{}'", post.id));
    }
  }

  std::vector<AnnotatedPost> out;
  out.reserve(posts.size());
  for (const auto& post : posts) {
    AnnotatedPost a{post, std::nullopt, std::nullopt, 0.0};
    if (!post.is_protected) {
      const auto c = model.classify(post.classification_text());
      a.machine = c.label;
      a.log_odds = c.log_odds;
      if (const auto it = overrides.find(post.id); it != overrides.end()) {
        a.override_label = it->second;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

ColorTag color_for(const AnnotatedPost& a) {
  const auto v = a.effective();
  if (!v) return ColorTag::None;
  switch (*v) {
    case Valence::Positive: return ColorTag::Green;
    case Valence::Negative: return ColorTag::Red;
    case Valence::Neutral: return ColorTag::None;
  }
  return ColorTag::None;
}

bool keep(const AnnotatedPost& a, ViewMode mode) {
  switch (mode) {
    case ViewMode::Original:
    case ViewMode::MoodColors: return true;
    case ViewMode::PositiveOnly: return a.effective() == Valence::Positive;
    case ViewMode::NegativeOnly: return a.effective() == Valence::Negative;
  }
  return false;
}

}  // namespace

std::vector<DisplayItem> apply_view(std::span<const AnnotatedPost> annotated, ViewMode mode) {
  std::vector<DisplayItem> out;
  for (const auto& a : annotated) {
    if (!keep(a, mode)) continue;
    out.push_back({a, mode == ViewMode::Original ? ColorTag::None : color_for(a)});
  }
  return out;
}

std::vector<DisplayItem> apply_view(std::span<const DisplayItem> items, ViewMode mode) {
  std::vector<AnnotatedPost> entries;
  entries.reserve(items.size());
  for (const auto& item : items) entries.push_back(item.entry);
  return apply_view(std::span<const AnnotatedPost>(entries), mode);
}

}  // namespace moodifier::feed
