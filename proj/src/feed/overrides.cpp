#include "moodifier/feed/overrides.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::feed {

std::optional<OverrideRecord> InMemoryOverrides::find_override(const std::string& user_id,
                                                               const std::string& post_id) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find({user_id, post_id});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void InMemoryOverrides::put_override(const OverrideRecord& record) {
  std::lock_guard lock(mutex_);
  records_.insert_or_assign({record.user_id, record.post_id}, record);
}

OverrideMap InMemoryOverrides::overrides_for(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  OverrideMap out;
  for (auto it = records_.lower_bound({user_id, std::string{}});
       it != records_.end() && it->first.first == user_id; ++it) {
    out.emplace(it->second.post_id, it->second.label);
  }
  return out;
}

std::size_t InMemoryOverrides::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

OverrideResult set_override(OverrideRepository& repo, experiment::TelemetrySink* sink,
                            const std::string& user_id, const Post& post, Valence label,
                            std::optional<Valence> current, Timestamp at) {
  if (post.is_protected) {
    throw Error(Errc::OverrideOnProtected,
                fmt::format("post '{}' is protected and carries no valence", post.id));
  }
  if (auto existing = repo.find_override(user_id, post.id); existing && existing->label == label) {
    return {*existing, false};
  }

  OverrideRecord record{user_id, post.id, label, at};
  repo.put_override(record);
  if (sink != nullptr) {
    sink->record({"", user_id, at, experiment::events::Relabel{post.id, current, label}});
  }
  return {record, true};
}

}  // namespace moodifier::feed
