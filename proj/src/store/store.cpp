#include "moodifier/store/store.hpp"

#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"
#include "moodifier/common/hash.hpp"
#include "moodifier/experiment/synthetic_study.hpp"

namespace moodifier::store {

namespace fs = std::filesystem;

bool Snapshot::empty() const {
  return participants.empty() && posts.empty() && labels.empty() && overrides.empty() &&
         events.empty() && surveys.empty();
}

struct Store::Parsed {
  std::vector<Post> posts;
  std::vector<PostLabel> labels;
  std::vector<experiment::Participant> participants;
  std::vector<feed::OverrideRecord> overrides;
  std::vector<experiment::TelemetryEvent> events;
  std::vector<analysis::SurveyResponse> surveys;

  std::size_t count() const {
    return posts.size() + labels.size() + participants.size() + overrides.size() + events.size() +
           surveys.size();
  }
};

Store::Store(fs::path directory) : directory_(std::move(directory)) {
  for (auto t : kAllTables) {
    const auto path = *directory_ / fmt::format("{}.ndjson", to_string(t));
    if (fs::exists(path)) load_table(t, path);
  }
}

bool Store::put_post(const Post& post) {
  std::unique_lock lock(mutex_);
  return put_post_locked(post);
}

bool Store::put_post_locked(const Post& post) {
  if (post.id.empty()) throw Error(Errc::InvalidArgument, "post without id");
  auto it = posts_.find(post.id);
  if (it != posts_.end() && it->second == post) return false;
  if (it != posts_.end() && it->second.author_id != post.author_id) {
    by_author_[it->second.author_id].erase(post.id);
  }
  by_author_[post.author_id].insert(post.id);
  if (post.is_protected) {
    labels_.erase(post.id);
    std::erase_if(overrides_, [&](const auto& kv) { return kv.first.second == post.id; });
  }
  posts_.insert_or_assign(post.id, post);
  return true;
}

std::optional<Post> Store::find_post(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = posts_.find(id);
  if (it == posts_.end()) return std::nullopt;
  return it->second;
}

std::vector<Post> Store::posts_by(const std::string& author_id) const {
  std::shared_lock lock(mutex_);
  std::vector<Post> out;
  const auto ids = by_author_.find(author_id);
  if (ids == by_author_.end()) return out;
  for (const auto& id : ids->second) out.push_back(posts_.at(id));
  return out;
}

std::size_t Store::post_count() const {
  std::shared_lock lock(mutex_);
  return posts_.size();
}

bool Store::put_label(const PostLabel& label) {
  std::unique_lock lock(mutex_);
  return put_label_locked(label);
}

bool Store::put_label_locked(const PostLabel& label) {
  const auto post = posts_.find(label.post_id);
  if (post == posts_.end()) {
    throw Error(Errc::UnknownPost, fmt::format("label for unknown post '{}'", label.post_id));
  }
  if (post->second.is_protected) {
    throw Error(Errc::PrivacyViolation,
                fmt::format("refusing to label protected post '{}'", label.post_id));
  }
  auto it = labels_.find(label.post_id);
  if (it != labels_.end() && it->second == label) return false;
  labels_.insert_or_assign(label.post_id, label);
  return true;
}

std::optional<PostLabel> Store::find_label(const std::string& post_id) const {
  std::shared_lock lock(mutex_);
  const auto it = labels_.find(post_id);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

bool Store::put_survey(const analysis::SurveyResponse& survey) {
  analysis::validate(survey);
  std::unique_lock lock(mutex_);
  Key2 key{survey.participant_id, std::string(to_string(survey.phase))};
  auto it = surveys_.find(key);
  if (it != surveys_.end() && it->second == survey) return false;
  surveys_.insert_or_assign(std::move(key), survey);
  return true;
}

std::optional<analysis::SurveyResponse> Store::find_survey(const std::string& participant_id,
                                                           analysis::SurveyPhase phase) const {
  std::shared_lock lock(mutex_);
  const auto it = surveys_.find({participant_id, std::string(to_string(phase))});
  if (it == surveys_.end()) return std::nullopt;
  return it->second;
}

std::optional<experiment::Participant> Store::find_participant(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = participants_.find(id);
  if (it == participants_.end()) return std::nullopt;
  return it->second;
}

std::optional<experiment::Participant> Store::find_by_handle(const std::string& handle) const {
  std::shared_lock lock(mutex_);
  for (const auto& [id, p] : participants_) {
    if (p.handle == handle) return p;
  }
  return std::nullopt;
}

std::size_t Store::participant_count() const {
  std::shared_lock lock(mutex_);
  return participants_.size();
}

void Store::put_participant(const experiment::Participant& p) {
  if (p.id.empty()) throw Error(Errc::InvalidArgument, "participant without id");
  std::unique_lock lock(mutex_);
  participants_.insert_or_assign(p.id, p);
}

std::optional<feed::OverrideRecord> Store::find_override(const std::string& user_id,
                                                         const std::string& post_id) const {
  std::shared_lock lock(mutex_);
  const auto it = overrides_.find({user_id, post_id});
  if (it == overrides_.end()) return std::nullopt;
  return it->second;
}

void Store::put_override(const feed::OverrideRecord& record) {
  std::unique_lock lock(mutex_);
  put_override_locked(record);
}

void Store::put_override_locked(const feed::OverrideRecord& record) {
  const auto post = posts_.find(record.post_id);
  if (post != posts_.end() && post->second.is_protected) {
    throw Error(Errc::PrivacyViolation,
                fmt::format("refusing to relabel protected post '{}'", record.post_id));
  }
  overrides_.insert_or_assign({record.user_id, record.post_id}, record);
}

feed::OverrideMap Store::overrides_for(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  feed::OverrideMap out;
  for (auto it = overrides_.lower_bound({user_id, std::string()});
       it != overrides_.end() && it->first.first == user_id; ++it) {
    out.emplace(it->second.post_id, it->second.label);
  }
  return out;
}

bool Store::record(experiment::TelemetryEvent event) {
  std::unique_lock lock(mutex_);
  if (!sequencer_.admit(event)) return false;
  auto id = event.id;
  events_.insert_or_assign(std::move(id), std::move(event));
  return true;
}

Snapshot Store::snapshot() const {
  std::shared_lock lock(mutex_);
  Snapshot s;
  for (const auto& [k, v] : participants_) s.participants.push_back(v);
  for (const auto& [k, v] : posts_) s.posts.push_back(v);
  for (const auto& [k, v] : labels_) s.labels.push_back(v);
  for (const auto& [k, v] : overrides_) s.overrides.push_back(v);
  for (const auto& [k, v] : events_) s.events.push_back(v);
  for (const auto& [k, v] : surveys_) s.surveys.push_back(v);
  return s;
}

bool Store::empty() const {
  std::shared_lock lock(mutex_);
  for (auto t : kAllTables) {
    if (size_locked(t) != 0) return false;
  }
  return true;
}

std::size_t Store::size(Table table) const {
  std::shared_lock lock(mutex_);
  return size_locked(table);
}

std::size_t Store::size_locked(Table table) const {
  switch (table) {
    case Table::Posts: return posts_.size();
    case Table::Participants: return participants_.size();
    case Table::Overrides: return overrides_.size();
    case Table::Events: return events_.size();
    case Table::Surveys: return surveys_.size();
    case Table::Labels: return labels_.size();
  }
  return 0;
}

void Store::export_locked(Table table, std::ostream& out) const {
  auto emit = [&out](const auto& map) {
    for (const auto& [k, v] : map) out << to_record(v).dump() << '\n';
  };
  switch (table) {
    case Table::Posts: emit(posts_); break;
    case Table::Participants: emit(participants_); break;
    case Table::Overrides: emit(overrides_); break;
    case Table::Events: emit(events_); break;
    case Table::Surveys: emit(surveys_); break;
    case Table::Labels: emit(labels_); break;
  }
}

std::string Store::fingerprint() const {
  std::shared_lock lock(mutex_);
  Fnv1a h;
  for (auto t : kAllTables) {
    std::ostringstream out;
    export_locked(t, out);
    h.update(to_string(t)).update("\n").update(out.str());
  }
  return h.hex();
}

void Store::flush() const {
  if (!directory_) return;
  std::shared_lock lock(mutex_);
  std::error_code ec;
  fs::create_directories(*directory_, ec);
  if (ec) throw Error(Errc::Io, fmt::format("cannot create '{}': {}", directory_->string(), ec.message()));
  for (auto t : kAllTables) {
    const auto path = *directory_ / fmt::format("{}.ndjson", to_string(t));
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", tmp.string()));
      export_locked(t, out);
      out.flush();
      if (!out) throw Error(Errc::Io, fmt::format("write to '{}' failed", tmp.string()));
    }
    fs::rename(tmp, path, ec);
    if (ec) throw Error(Errc::Io, fmt::format("cannot replace '{}': {}", path.string(), ec.message()));
  }
}

std::size_t Store::export_table(Table table, const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", path.string()));
  const auto n = export_table(table, out);
  if (!out) throw Error(Errc::Io, fmt::format("write to '{}' failed", path.string()));
  return n;
}

std::size_t Store::export_table(Table table, std::ostream& out) const {
  std::shared_lock lock(mutex_);
  export_locked(table, out);
  return size_locked(table);
}

Store::Parsed Store::parse_lines(Table table, std::istream& in, bool bundle) {
  Parsed parsed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      Table t = table;
      if (bundle) {
        if (!j.is_object() || !j.contains("table") || !j["table"].is_string() || !j.contains("record")) {
          throw Error(Errc::CorruptRecord, "bundle line needs 'table' and 'record'");
        }
        const auto parsed_table = parse_table(j["table"].get<std::string>());
        if (!parsed_table) throw Error(Errc::CorruptRecord, "unknown table");
        t = *parsed_table;
        j = std::move(j["record"]);
      }
      switch (t) {
        case Table::Posts: parsed.posts.push_back(post_from_record(j)); break;
        case Table::Participants: parsed.participants.push_back(participant_from_record(j)); break;
        case Table::Overrides: parsed.overrides.push_back(override_from_record(j)); break;
        case Table::Events: parsed.events.push_back(event_from_record(j)); break;
        case Table::Surveys: {
          auto s = survey_from_record(j);
          analysis::validate(s);
          parsed.surveys.push_back(std::move(s));
          break;
        }
        case Table::Labels: parsed.labels.push_back(label_from_record(j)); break;
      }
    } catch (const Json::exception& e) {
      throw CorruptRecordError(line_no, e.what());
    } catch (const Error& e) {
      throw CorruptRecordError(line_no, e.what());
    }
  }
  if (in.bad()) throw Error(Errc::Io, "read failed");
  return parsed;
}

std::size_t Store::apply(Parsed&& parsed) {
  std::unique_lock lock(mutex_);

  // Validate privacy against the state the batch would produce before
  // mutating anything.
  std::map<std::string, bool, std::less<>> protected_after;
  for (const auto& p : parsed.posts) protected_after[p.id] = p.is_protected;
  auto is_protected = [&](const std::string& id) -> std::optional<bool> {
    if (auto it = protected_after.find(id); it != protected_after.end()) return it->second;
    if (auto it = posts_.find(id); it != posts_.end()) return it->second.is_protected;
    return std::nullopt;
  };
  for (const auto& l : parsed.labels) {
    const auto prot = is_protected(l.post_id);
    if (!prot) throw Error(Errc::UnknownPost, fmt::format("label for unknown post '{}'", l.post_id));
    if (*prot) throw Error(Errc::PrivacyViolation, fmt::format("label on protected post '{}'", l.post_id));
  }
  for (const auto& o : parsed.overrides) {
    if (is_protected(o.post_id).value_or(false)) {
      throw Error(Errc::PrivacyViolation, fmt::format("override on protected post '{}'", o.post_id));
    }
  }

  for (const auto& p : parsed.posts) put_post_locked(p);
  for (const auto& l : parsed.labels) put_label_locked(l);
  for (const auto& p : parsed.participants) participants_.insert_or_assign(p.id, p);
  for (const auto& o : parsed.overrides) put_override_locked(o);
  for (auto& e : parsed.events) {
    sequencer_.observe(e);
    auto id = e.id;
    events_.insert_or_assign(std::move(id), std::move(e));
  }
  for (const auto& s : parsed.surveys) {
    surveys_.insert_or_assign({s.participant_id, std::string(to_string(s.phase))}, s);
  }
  return parsed.count();
}

std::size_t Store::load_table(Table table, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, fmt::format("cannot read '{}'", path.string()));
  return load_table(table, in);
}

std::size_t Store::load_table(Table table, std::istream& in) {
  return apply(parse_lines(table, in, false));
}

void Store::write_bundle(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  for (auto t : kAllTables) {
    std::ostringstream lines;
    export_locked(t, lines);
    std::istringstream records(lines.str());
    std::string line;
    while (std::getline(records, line)) {
      out << R"({"table":")" << to_string(t) << R"(","record":)" << line << "}\n";
    }
  }
}

std::size_t Store::read_bundle(std::istream& in) {
  return apply(parse_lines(Table::Posts, in, true));
}

void load_study(Store& store, const experiment::StudyData& study) {
  for (const auto& p : study.participants) store.put_participant(p);
  for (const auto& p : study.posts) store.put_post(p);
  for (const auto& l : study.labels) store.put_label(l);
  for (const auto& o : study.overrides) store.put_override(o);
  for (const auto& e : study.events) store.record(e);
  for (const auto& s : study.surveys) store.put_survey(s);
}

}  // namespace moodifier::store
