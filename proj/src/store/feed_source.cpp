#include "moodifier/store/feed_source.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <tuple>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"
#include "moodifier/store/records.hpp"

namespace moodifier::store {

namespace {

std::size_t parse_page_token(const std::optional<std::string>& token) {
  if (!token) return 0;
  std::size_t index = 0;
  const auto* first = token->data();
  const auto* last = first + token->size();
  if (token->rfind("page-", 0) != 0) throw Error(Errc::InvalidArgument, "malformed page token");
  const auto [ptr, ec] = std::from_chars(first + 5, last, index);
  if (ec != std::errc{} || ptr != last) throw Error(Errc::InvalidArgument, "malformed page token");
  return index;
}

std::string page_token(std::size_t index) { return fmt::format("page-{}", index); }

}  // namespace

void ScriptedFeedSource::set_timeline(const std::string& user_id, std::vector<std::vector<Post>> pages) {
  std::lock_guard lock(mutex_);
  timelines_[user_id] = std::move(pages);
}

void ScriptedFeedSource::set_friends(const std::string& user_id, std::vector<std::string> friends) {
  std::lock_guard lock(mutex_);
  friends_[user_id] = std::move(friends);
}

void ScriptedFeedSource::inject_fault(Fault fault, std::chrono::seconds retry_after) {
  std::lock_guard lock(mutex_);
  faults_.emplace_back(fault, retry_after);
}

std::size_t ScriptedFeedSource::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

void ScriptedFeedSource::maybe_fail() {
  ++calls_;
  if (faults_.empty()) return;
  const auto [fault, retry_after] = faults_.front();
  faults_.pop_front();
  if (fault == Fault::RateLimited) throw RateLimitedError(retry_after);
  throw Error(Errc::SourceUnavailable, "scripted outage");
}

TimelinePage ScriptedFeedSource::fetch_timeline(const std::string& user_id, Timestamp from,
                                                Timestamp to,
                                                const std::optional<std::string>& token) {
  std::lock_guard lock(mutex_);
  maybe_fail();
  const auto it = timelines_.find(user_id);
  if (it == timelines_.end()) return {};
  const auto index = parse_page_token(token);
  if (index >= it->second.size()) return {};
  TimelinePage page;
  for (const auto& p : it->second[index]) {
    if (from <= p.created_at && p.created_at < to) page.posts.push_back(p);
  }
  if (index + 1 < it->second.size()) page.next_token = page_token(index + 1);
  return page;
}

std::vector<std::string> ScriptedFeedSource::fetch_friends(const std::string& user_id) {
  std::lock_guard lock(mutex_);
  maybe_fail();
  const auto it = friends_.find(user_id);
  if (it == friends_.end()) {
    throw Error(Errc::SourceUnavailable, fmt::format("unknown user '{}'", user_id));
  }
  return it->second;
}

DirectoryFeedSource::DirectoryFeedSource(const std::filesystem::path& directory, std::size_t page_size)
    : page_size_(std::max<std::size_t>(1, page_size)) {
  const auto posts_path = directory / "posts.ndjson";
  std::ifstream in(posts_path);
  if (!in) throw Error(Errc::SourceUnavailable, fmt::format("cannot read '{}'", posts_path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto post = post_from_record(Json::parse(line));
      by_author_[post.author_id].push_back(std::move(post));
    } catch (const Json::exception& e) {
      throw CorruptRecordError(line_no, e.what());
    } catch (const Error& e) {
      throw CorruptRecordError(line_no, e.what());
    }
  }
  for (auto& [author, posts] : by_author_) {
    std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
      return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
    });
  }

  const auto friends_path = directory / "friends.json";
  if (std::filesystem::exists(friends_path)) {
    std::ifstream fin(friends_path);
    try {
      const auto doc = Json::parse(fin);
      for (const auto& [user, ids] : doc.items()) friends_[user] = ids.get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      throw Error(Errc::SourceUnavailable, fmt::format("malformed friends file: {}", e.what()));
    }
  }
}

TimelinePage DirectoryFeedSource::fetch_timeline(const std::string& user_id, Timestamp from,
                                                 Timestamp to,
                                                 const std::optional<std::string>& token) {
  const auto it = by_author_.find(user_id);
  if (it == by_author_.end()) return {};
  std::vector<const Post*> in_range;
  for (const auto& p : it->second) {
    if (from <= p.created_at && p.created_at < to) in_range.push_back(&p);
  }
  const auto index = parse_page_token(token);
  const auto begin = index * page_size_;
  TimelinePage page;
  for (std::size_t i = begin; i < std::min(in_range.size(), begin + page_size_); ++i) {
    page.posts.push_back(*in_range[i]);
  }
  if (begin + page_size_ < in_range.size()) page.next_token = page_token(index + 1);
  return page;
}

std::vector<std::string> DirectoryFeedSource::fetch_friends(const std::string& user_id) {
  const auto it = friends_.find(user_id);
  if (it == friends_.end()) {
    throw Error(Errc::SourceUnavailable, fmt::format("unknown user '{}'", user_id));
  }
  return it->second;
}

}  // namespace moodifier::store
