#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "moodifier/common/post.hpp"
#include "moodifier/common/time.hpp"

namespace moodifier::store {

struct TimelinePage {
  std::vector<Post> posts;
  std::optional<std::string> next_token;
};

// Paginated access to a social platform. Pages never overlap and hold only
// posts created in [from, to). Sources signal throttling with
// RateLimitedError and transient outages with Error(SourceUnavailable);
// callers decide whether and when to retry.
class FeedSource {
 public:
  virtual ~FeedSource() = default;
  virtual TimelinePage fetch_timeline(const std::string& user_id, Timestamp from, Timestamp to,
                                      const std::optional<std::string>& page_token) = 0;
  virtual std::vector<std::string> fetch_friends(const std::string& user_id) = 0;
};

// In-memory source with scripted pages and injectable faults, for tests and
// offline runs.
class ScriptedFeedSource : public FeedSource {
 public:
  enum class Fault { Unavailable, RateLimited };

  // Each inner vector is one page as served (after [from, to) filtering).
  void set_timeline(const std::string& user_id, std::vector<std::vector<Post>> pages);
  void set_friends(const std::string& user_id, std::vector<std::string> friends);
  // The next call (of either kind) fails with `fault`; queued faults fire in order.
  void inject_fault(Fault fault, std::chrono::seconds retry_after = std::chrono::seconds{60});

  TimelinePage fetch_timeline(const std::string& user_id, Timestamp from, Timestamp to,
                              const std::optional<std::string>& page_token) override;
  std::vector<std::string> fetch_friends(const std::string& user_id) override;

  std::size_t calls() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::vector<Post>>> timelines_;
  std::map<std::string, std::vector<std::string>> friends_;
  std::deque<std::pair<Fault, std::chrono::seconds>> faults_;
  std::size_t calls_ = 0;

  void maybe_fail();
};

// File-backed source over a directory holding `posts.ndjson` (post records)
// and optionally `friends.json` ({"user": ["friend", ...]}). Timelines are
// served in (created_at, id) order in pages of `page_size`.
class DirectoryFeedSource : public FeedSource {
 public:
  explicit DirectoryFeedSource(const std::filesystem::path& directory, std::size_t page_size = 50);

  TimelinePage fetch_timeline(const std::string& user_id, Timestamp from, Timestamp to,
                              const std::optional<std::string>& page_token) override;
  std::vector<std::string> fetch_friends(const std::string& user_id) override;

 private:
  std::size_t page_size_;
  std::map<std::string, std::vector<Post>> by_author_;
  std::map<std::string, std::vector<std::string>> friends_;
};

}  // namespace moodifier::store
