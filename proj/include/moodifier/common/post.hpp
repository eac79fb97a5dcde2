#pragma once

#include <optional>
#include <string>

#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"

namespace moodifier {

// One feed item.
struct Post {
  std::string id;
  std::string author_id;
  std::string text;
  Timestamp created_at{};
  bool is_protected = false;
  // The author's own words when republishing someone else's post.
  std::optional<std::string> quoted_text;

  // Text submitted to the classifier: the post body with any quoted
  // commentary appended after a single space.
  std::string classification_text() const {
    return quoted_text ? text + " " + *quoted_text : text;
  }

  bool operator==(const Post&) const = default;
};

// Machine classification of one non-protected post.
struct PostLabel {
  std::string post_id;
  Valence label = Valence::Neutral;
  double log_odds = 0.0;
  // Model fingerprint, or "planted" for synthetic fixtures.
  std::string source;

  bool operator==(const PostLabel&) const = default;
};

}  // namespace moodifier
