#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "moodifier/common/post.hpp"
#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"
#include "moodifier/experiment/telemetry.hpp"
#include "moodifier/feed/annotate.hpp"

namespace moodifier::feed {

// A per-user relabel. Overrides are keyed by (user, post) and are never
// visible to other users.
struct OverrideRecord {
  std::string user_id;
  std::string post_id;
  Valence label = Valence::Neutral;
  Timestamp at{};

  bool operator==(const OverrideRecord&) const = default;
};

class OverrideRepository {
 public:
  virtual ~OverrideRepository() = default;
  virtual std::optional<OverrideRecord> find_override(const std::string& user_id,
                                                      const std::string& post_id) const = 0;
  // Insert or replace the record for (user_id, post_id).
  virtual void put_override(const OverrideRecord& record) = 0;
  virtual OverrideMap overrides_for(const std::string& user_id) const = 0;
};

class InMemoryOverrides : public OverrideRepository {
 public:
  std::optional<OverrideRecord> find_override(const std::string& user_id,
                                              const std::string& post_id) const override;
  void put_override(const OverrideRecord& record) override;
  OverrideMap overrides_for(const std::string& user_id) const override;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, OverrideRecord> records_;
};

struct OverrideResult {
  OverrideRecord record;
  bool changed = false;  // false when the same label was already stored
};

// Stores `label` as `user_id`'s relabel of `post`. `current` is the label
// the user saw before relabeling (the event's "from"). Setting the same
// label again stores nothing and emits nothing; otherwise a Relabel event
// goes to `sink` when one is given. Throws Error(OverrideOnProtected).
OverrideResult set_override(OverrideRepository& repo, experiment::TelemetrySink* sink,
                            const std::string& user_id, const Post& post, Valence label,
                            std::optional<Valence> current, Timestamp at);

}  // namespace moodifier::feed
