#include "moodifier/store/records.hpp"

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::store {

namespace {

[[noreturn]] void corrupt(const std::string& detail) { throw Error(Errc::CorruptRecord, detail); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) corrupt("record is not an object");
  const auto it = j.find(key);
  if (it == j.end()) corrupt(fmt::format("missing field '{}'", key));
  return *it;
}

std::string get_string(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) corrupt(fmt::format("field '{}' is not a string", key));
  return v.get<std::string>();
}

bool get_bool(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_boolean()) corrupt(fmt::format("field '{}' is not a boolean", key));
  return v.get<bool>();
}

long long get_int(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) corrupt(fmt::format("field '{}' is not an integer", key));
  return v.get<long long>();
}

double get_double(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) corrupt(fmt::format("field '{}' is not a number", key));
  return v.get<double>();
}

Timestamp get_time(const Json& j, const char* key) {
  try {
    return parse_timestamp(get_string(j, key));
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptRecord) throw;
    corrupt(fmt::format("field '{}': {}", key, e.what()));
  }
}

Valence get_valence(const Json& j, const char* key) {
  const auto v = parse_valence(get_string(j, key));
  if (!v) corrupt(fmt::format("field '{}' is not a valence", key));
  return *v;
}

std::optional<Valence> get_optional_valence(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return get_valence(j, key);
}

void check_version(const Json& j) {
  const auto v = get_int(j, "schema_version");
  if (v != kSchemaVersion) corrupt(fmt::format("unsupported schema_version {}", v));
}

Json envelope() { return Json{{"schema_version", kSchemaVersion}}; }

}  // namespace

std::string_view to_string(Table t) {
  switch (t) {
    case Table::Posts: return "posts";
    case Table::Participants: return "participants";
    case Table::Overrides: return "overrides";
    case Table::Events: return "events";
    case Table::Surveys: return "surveys";
    case Table::Labels: return "labels";
  }
  return "posts";
}

std::optional<Table> parse_table(std::string_view name) {
  for (auto t : kAllTables) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

Json to_record(const Post& post) {
  Json j = envelope();
  j["id"] = post.id;
  j["author_id"] = post.author_id;
  j["text"] = post.text;
  j["created_at"] = format_timestamp(post.created_at);
  j["protected"] = post.is_protected;
  if (post.quoted_text) j["quoted_text"] = *post.quoted_text;
  return j;
}

Post post_from_record(const Json& j) {
  check_version(j);
  Post p;
  p.id = get_string(j, "id");
  p.author_id = get_string(j, "author_id");
  p.text = get_string(j, "text");
  p.created_at = get_time(j, "created_at");
  p.is_protected = get_bool(j, "protected");
  if (const auto it = j.find("quoted_text"); it != j.end() && !it->is_null()) {
    p.quoted_text = get_string(j, "quoted_text");
  }
  return p;
}

Json to_record(const PostLabel& label) {
  Json j = envelope();
  j["post_id"] = label.post_id;
  j["label"] = to_string(label.label);
  j["log_odds"] = label.log_odds;
  j["source"] = label.source;
  return j;
}

PostLabel label_from_record(const Json& j) {
  check_version(j);
  return {get_string(j, "post_id"), get_valence(j, "label"), get_double(j, "log_odds"),
          get_string(j, "source")};
}

Json to_record(const experiment::Participant& p) {
  Json j = envelope();
  j["id"] = p.id;
  j["handle"] = p.handle;
  j["group"] = to_string(p.group);
  j["installed_at"] = format_timestamp(p.installed_at);
  j["protected_account"] = p.protected_account;
  j["control_cohort"] = p.control_cohort ? Json(*p.control_cohort) : Json(nullptr);
  return j;
}

experiment::Participant participant_from_record(const Json& j) {
  check_version(j);
  experiment::Participant p;
  p.id = get_string(j, "id");
  p.handle = get_string(j, "handle");
  const auto group = experiment::parse_group(get_string(j, "group"));
  if (!group) corrupt("field 'group' is not T1 or T2");
  p.group = *group;
  p.installed_at = get_time(j, "installed_at");
  p.protected_account = get_bool(j, "protected_account");
  const auto& cohort = field(j, "control_cohort");
  if (!cohort.is_null()) {
    if (!cohort.is_array()) corrupt("field 'control_cohort' is not an array");
    std::vector<std::string> ids;
    for (const auto& id : cohort) {
      if (!id.is_string()) corrupt("control_cohort entry is not a string");
      ids.push_back(id.get<std::string>());
    }
    p.control_cohort = std::move(ids);
  }
  return p;
}

Json to_record(const feed::OverrideRecord& o) {
  Json j = envelope();
  j["user_id"] = o.user_id;
  j["post_id"] = o.post_id;
  j["label"] = to_string(o.label);
  j["at"] = format_timestamp(o.at);
  return j;
}

feed::OverrideRecord override_from_record(const Json& j) {
  check_version(j);
  return {get_string(j, "user_id"), get_string(j, "post_id"), get_valence(j, "label"),
          get_time(j, "at")};
}

Json payload_to_json(const experiment::EventPayload& payload) {
  using namespace experiment::events;
  struct Visitor {
    Json operator()(const ViewActivated& e) const { return {{"mode", to_string(e.mode)}}; }
    Json operator()(const PostsDisplayed& e) const { return {{"count", e.count}}; }
    Json operator()(const Relabel& e) const {
      Json j{{"post_id", e.post_id}, {"to", to_string(e.to)}};
      j["from"] = e.from ? Json(to_string(*e.from)) : Json(nullptr);
      return j;
    }
    Json operator()(const StatsViewed&) const { return Json::object(); }
    Json operator()(const Reminder&) const { return Json::object(); }
  };
  return std::visit(Visitor{}, payload);
}

experiment::EventPayload payload_from_json(std::string_view kind, const Json& payload) {
  using namespace experiment::events;
  if (!payload.is_object()) corrupt("event payload is not an object");
  if (kind == "view_activated") {
    const auto mode = parse_view_mode(get_string(payload, "mode"));
    if (!mode) corrupt("unknown view mode");
    return ViewActivated{*mode};
  }
  if (kind == "posts_displayed") {
    const auto n = get_int(payload, "count");
    if (n < 0) corrupt("negative display count");
    return PostsDisplayed{static_cast<int>(n)};
  }
  if (kind == "relabel") {
    return Relabel{get_string(payload, "post_id"), get_optional_valence(payload, "from"),
                   get_valence(payload, "to")};
  }
  if (kind == "stats_viewed") return StatsViewed{};
  if (kind == "reminder") return Reminder{};
  corrupt(fmt::format("unknown event kind '{}'", kind));
}

Json to_record(const experiment::TelemetryEvent& e) {
  Json j = envelope();
  j["id"] = e.id;
  j["participant_id"] = e.participant_id;
  j["kind"] = experiment::kind_name(e.payload);
  j["at"] = format_timestamp(e.at);
  j["payload"] = payload_to_json(e.payload);
  return j;
}

experiment::TelemetryEvent event_from_record(const Json& j) {
  check_version(j);
  experiment::TelemetryEvent e;
  e.id = get_string(j, "id");
  e.participant_id = get_string(j, "participant_id");
  e.at = get_time(j, "at");
  e.payload = payload_from_json(get_string(j, "kind"), field(j, "payload"));
  return e;
}

Json to_record(const analysis::SurveyResponse& s) {
  Json j = envelope();
  j["participant_id"] = s.participant_id;
  j["phase"] = to_string(s.phase);
  j["submitted_at"] = format_timestamp(s.submitted_at);
  for (std::size_t i = 0; i < s.questions.size(); ++i) j[fmt::format("q{}", i + 1)] = s.questions[i];
  j["emoji"] = s.emoji;
  j["own_valence"] = s.own_valence ? Json(to_string(*s.own_valence)) : Json(nullptr);
  j["friends_valence"] = s.friends_valence ? Json(to_string(*s.friends_valence)) : Json(nullptr);
  j["phq8"] = s.phq8;
  j["free_text"] = s.free_text;
  return j;
}

analysis::SurveyResponse survey_from_record(const Json& j) {
  check_version(j);
  analysis::SurveyResponse s;
  s.participant_id = get_string(j, "participant_id");
  const auto phase = analysis::parse_phase(get_string(j, "phase"));
  if (!phase) corrupt("field 'phase' is not pre or post");
  s.phase = *phase;
  s.submitted_at = get_time(j, "submitted_at");
  for (std::size_t i = 0; i < s.questions.size(); ++i) {
    const auto key = fmt::format("q{}", i + 1);
    s.questions[i] = static_cast<int>(get_int(j, key.c_str()));
  }
  s.emoji = get_string(j, "emoji");
  s.own_valence = get_optional_valence(j, "own_valence");
  s.friends_valence = get_optional_valence(j, "friends_valence");
  const auto& phq = field(j, "phq8");
  if (!phq.is_array() || phq.size() != s.phq8.size()) corrupt("field 'phq8' must hold 8 integers");
  for (std::size_t i = 0; i < s.phq8.size(); ++i) {
    if (!phq[i].is_number_integer()) corrupt("field 'phq8' must hold 8 integers");
    s.phq8[i] = phq[i].get<int>();
  }
  s.free_text = get_string(j, "free_text");
  return s;
}

}  // namespace moodifier::store
