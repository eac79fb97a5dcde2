#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "moodifier/analysis/survey.hpp"
#include "moodifier/common/post.hpp"
#include "moodifier/experiment/participant.hpp"
#include "moodifier/experiment/telemetry.hpp"
#include "moodifier/feed/overrides.hpp"
#include "moodifier/store/records.hpp"

namespace moodifier::experiment {
struct StudyData;
}

namespace moodifier::store {

// Immutable copy of every table, each sorted by primary key.
struct Snapshot {
  std::vector<experiment::Participant> participants;
  std::vector<Post> posts;
  std::vector<PostLabel> labels;
  std::vector<feed::OverrideRecord> overrides;
  std::vector<experiment::TelemetryEvent> events;
  std::vector<analysis::SurveyResponse> surveys;

  bool empty() const;
};

// Keyed in-memory tables with optional newline-delimited persistence, one
// `<table>.ndjson` file per table. Writes upsert on the primary key and are
// serialized; readers share a lock and only ever see whole records.
//
// Privacy: a protected post never has a label or an override. Attempts to
// attach one throw Error(PrivacyViolation); marking a stored post protected
// drops any it had.
class Store : public feed::OverrideRepository,
              public experiment::ParticipantDirectory,
              public experiment::TelemetrySink {
 public:
  Store() = default;
  // Loads existing tables from `directory` (created on flush if missing).
  // Throws CorruptRecordError for malformed files.
  explicit Store(std::filesystem::path directory);

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::optional<std::filesystem::path>& directory() const { return directory_; }

  // Returns true when the post was new or its content changed.
  bool put_post(const Post& post);
  std::optional<Post> find_post(const std::string& id) const;
  // Posts by one author in id order.
  std::vector<Post> posts_by(const std::string& author_id) const;
  std::size_t post_count() const;

  // Throws Error(UnknownPost) or Error(PrivacyViolation).
  bool put_label(const PostLabel& label);
  std::optional<PostLabel> find_label(const std::string& post_id) const;

  bool put_survey(const analysis::SurveyResponse& survey);
  std::optional<analysis::SurveyResponse> find_survey(const std::string& participant_id,
                                                      analysis::SurveyPhase phase) const;

  // ParticipantDirectory
  std::optional<experiment::Participant> find_participant(const std::string& id) const override;
  std::optional<experiment::Participant> find_by_handle(const std::string& handle) const override;
  std::size_t participant_count() const override;
  void put_participant(const experiment::Participant& p) override;

  // OverrideRepository; put_override throws Error(PrivacyViolation) for a
  // protected post.
  std::optional<feed::OverrideRecord> find_override(const std::string& user_id,
                                                    const std::string& post_id) const override;
  void put_override(const feed::OverrideRecord& record) override;
  feed::OverrideMap overrides_for(const std::string& user_id) const override;

  // TelemetrySink
  bool record(experiment::TelemetryEvent event) override;

  Snapshot snapshot() const;
  bool empty() const;
  std::size_t size(Table table) const;

  // Content hash over every table in key order; equal stores hash equal
  // regardless of insertion order.
  std::string fingerprint() const;

  // Writes every table to the directory. Each file is replaced atomically.
  // No-op for a store without a directory.
  void flush() const;

  // Writes one table as newline-delimited records in key order.
  std::size_t export_table(Table table, const std::filesystem::path& path) const;
  std::size_t export_table(Table table, std::ostream& out) const;
  // Upserts every record of the file into `table`. Throws CorruptRecordError
  // with the 1-based line number of the first malformed line; nothing from
  // the file is applied in that case.
  std::size_t load_table(Table table, const std::filesystem::path& path);
  std::size_t load_table(Table table, std::istream& in);

  // A bundle is every table in one stream, one {"table", "record"} object
  // per line.
  void write_bundle(std::ostream& out) const;
  std::size_t read_bundle(std::istream& in);

 private:
  using Key2 = std::pair<std::string, std::string>;

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> directory_;
  std::map<std::string, Post, std::less<>> posts_;
  std::map<std::string, std::set<std::string>, std::less<>> by_author_;
  std::map<std::string, PostLabel, std::less<>> labels_;
  std::map<std::string, experiment::Participant, std::less<>> participants_;
  std::map<Key2, feed::OverrideRecord> overrides_;
  std::map<std::string, experiment::TelemetryEvent, std::less<>> events_;
  std::map<Key2, analysis::SurveyResponse> surveys_;
  experiment::EventSequencer sequencer_;

  struct Parsed;
  static Parsed parse_lines(Table table, std::istream& in, bool bundle);
  std::size_t apply(Parsed&& parsed);

  bool put_post_locked(const Post& post);
  bool put_label_locked(const PostLabel& label);
  void put_override_locked(const feed::OverrideRecord& record);
  void export_locked(Table table, std::ostream& out) const;
  std::size_t size_locked(Table table) const;
};

// Copies a generated study into the store (participants, posts, labels,
// overrides, events, surveys).
void load_study(Store& store, const experiment::StudyData& study);

}  // namespace moodifier::store
