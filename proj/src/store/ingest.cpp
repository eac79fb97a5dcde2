#include "moodifier/store/ingest.hpp"

#include <set>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::store {

std::size_t ingest_timeline(FeedSource& source, Store& store, const std::string& user_id,
                            Timestamp from, Timestamp to, const sentiment::SentimentModel* model) {
  if (!(from < to)) {
    throw Error(Errc::InvalidRange, fmt::format("empty ingestion range [{}, {})",
                                                format_timestamp(from), format_timestamp(to)));
  }
  const std::string source_tag = model ? model->fingerprint() : std::string();
  std::size_t fresh = 0;
  std::optional<std::string> token;
  std::set<std::string> seen_tokens;
  do {
    auto page = source.fetch_timeline(user_id, from, to, token);
    for (const auto& post : page.posts) {
      const bool known = store.find_post(post.id).has_value();
      store.put_post(post);
      if (!known) ++fresh;
      if (model && !post.is_protected) {
        const auto c = model->classify(post.classification_text());
        store.put_label({post.id, c.label, c.log_odds, source_tag});
      }
    }
    token = std::move(page.next_token);
    if (token && !seen_tokens.insert(*token).second) {
      throw Error(Errc::SourceUnavailable, fmt::format("source repeated page token '{}'", *token));
    }
  } while (token);
  return fresh;
}

std::vector<std::string> fetch_friends_capped(FeedSource& source, const std::string& user_id) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& id : source.fetch_friends(user_id)) {
    if (seen.insert(id).second) out.push_back(std::move(id));
  }
  return out;
}

}  // namespace moodifier::store
