#include "moodifier/gateway/service.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include <fmt/format.h>

#include "moodifier/analysis/report.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/common/hash.hpp"
#include "moodifier/experiment/personal_stats.hpp"
#include "moodifier/feed/annotate.hpp"
#include "moodifier/feed/overrides.hpp"
#include "moodifier/feed/session.hpp"
#include "moodifier/sentiment/model_io.hpp"
#include "moodifier/store/records.hpp"

namespace moodifier::gateway {

namespace {

using nlohmann::json;

constexpr std::size_t kDefaultFeedLimit = 50;

int http_status(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::CorruptRecord:
    case Errc::InvalidSurvey:
    case Errc::OutOfRangeItem:
    case Errc::InvalidPeriod:
    case Errc::InvalidRange:
    case Errc::InvalidTau:
      return 400;
    case Errc::StatsNotAvailable:
    case Errc::PrivacyViolation:
      return 403;
    case Errc::UnknownParticipant:
    case Errc::UnknownPost:
    case Errc::EmptyStore:
      return 404;
    case Errc::AlreadyEnrolled:
    case Errc::CohortAlreadySampled:
    case Errc::ClockSkew:
    case Errc::NonMonotonicEvent:
    case Errc::NotYetAvailable:
      return 409;
    case Errc::OverrideOnProtected:
    case Errc::InsufficientData:
    case Errc::DegenerateVariance:
    case Errc::UnlabeledPost:
      return 422;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, std::string_view message, json extra = json::object()) {
  extra["error"] = to_string(code);
  extra["message"] = message;
  send_json(res, extra, http_status(code));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, fmt::format("request body is not JSON: {}", e.what()));
  }
}

std::string required_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(Errc::InvalidArgument, fmt::format("'{}' must be a string", key));
  }
  return it->get<std::string>();
}

std::string required_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw Error(Errc::InvalidArgument, fmt::format("missing query parameter '{}'", key));
  return req.get_param_value(key);
}

Timestamp time_param(const httplib::Request& req, const char* key, Timestamp fallback) {
  return req.has_param(key) ? parse_timestamp(req.get_param_value(key)) : fallback;
}

Timestamp time_field(const json& body, const char* key, Timestamp fallback) {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(Errc::InvalidArgument, fmt::format("'{}' must be a timestamp", key));
  return parse_timestamp(it->get<std::string>());
}

Valence valence_field(const json& body, const char* key) {
  const auto v = parse_valence(required_string(body, key));
  if (!v) throw Error(Errc::InvalidArgument, fmt::format("'{}' must be positive, neutral or negative", key));
  return *v;
}

json opt_valence(std::optional<Valence> v) { return v ? json(to_string(*v)) : json(nullptr); }

json participant_json(const experiment::Participant& p) {
  auto j = store::to_record(p);
  j.erase("schema_version");
  j["stats_available"] = p.group == experiment::TreatmentGroup::T1;
  return j;
}

json display_json(const feed::DisplayItem& item) {
  const auto& e = item.entry;
  json j{{"post_id", e.post.id},
         {"author_id", e.post.author_id},
         {"text", e.post.text},
         {"created_at", format_timestamp(e.post.created_at)},
         {"protected", e.post.is_protected},
         {"machine", opt_valence(e.machine)},
         {"override", opt_valence(e.override_label)},
         {"effective", opt_valence(e.effective())},
         {"color", feed::to_string(item.color)}};
  j["quoted_text"] = e.post.quoted_text ? json(*e.post.quoted_text) : json(nullptr);
  j["log_odds"] = e.post.is_protected ? json(nullptr) : json(e.log_odds);
  return j;
}

experiment::Participant require_participant(const store::Store& s, const std::string& id) {
  auto p = s.find_participant(id);
  if (!p) throw Error(Errc::UnknownParticipant, fmt::format("unknown participant '{}'", id));
  return *p;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  sentiment::SentimentModel model;
  std::shared_ptr<store::Store> store;
  httplib::Server server;
  std::mutex write_mutex;  // serializes every mutating request
  std::map<std::string, feed::ViewSession> sessions;
  experiment::TreatmentAssigner assigner;
  std::thread thread;
  int port = -1;
  bool stopped = false;

  Impl(ServiceConfig c, sentiment::SentimentModel m, std::shared_ptr<store::Store> s)
      : config(std::move(c)), model(std::move(m)), store(std::move(s)), assigner(config.assignment_seed) {
    if (config.tau) model = model.with_tau(*config.tau);
    // Continue the assignment sequence after a restart.
    for (std::size_t i = 0; i < store->participant_count(); ++i) assigner.next();
    routes();
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const RateLimitedError& e) {
        send_error(res, e.code(), e.what(), {{"retry_after", e.retry_after().count()}});
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, Errc::InvalidArgument, e.what());
      } catch (const std::exception& e) {
        send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
      }
    };
  }

  void routes() {
    // SO_REUSEADDR only: httplib's default adds SO_REUSEPORT, which lets a
    // second instance silently share the port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    server.Get("/health", guarded([this](const auto&, auto& res) {
      send_json(res, {{"status", "ok"},
                      {"model_fingerprint", model.fingerprint()},
                      {"tau", model.tau()},
                      {"vocabulary", model.vocabulary_size()}});
    }));
    server.Post("/classify", guarded([this](const auto& req, auto& res) { classify(req, res); }));
    server.Get("/feed", guarded([this](const auto& req, auto& res) { feed(req, res); }));
    server.Post("/override", guarded([this](const auto& req, auto& res) { override_label(req, res); }));
    server.Get("/stats", guarded([this](const auto& req, auto& res) { stats(req, res); }));
    server.Post("/events", guarded([this](const auto& req, auto& res) { events(req, res); }));
    server.Post("/enroll", guarded([this](const auto& req, auto& res) { enroll(req, res); }));
    server.Get(R"(/survey/(pre|post))", guarded([this](const auto& req, auto& res) { survey_get(req, res); }));
    server.Post(R"(/survey/(pre|post))", guarded([this](const auto& req, auto& res) { survey_post(req, res); }));
    server.Get("/report", guarded([this](const auto& req, auto& res) { report(req, res); }));
    if (config.static_dir) server.set_mount_point("/", config.static_dir->string());
  }

  json classification_json(std::string_view text) const {
    const auto c = model.classify(text);
    return {{"label", to_string(c.label)}, {"log_odds", c.log_odds}, {"confidence", c.confidence}};
  }

  void classify(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (const auto it = body.find("texts"); it != body.end()) {
      if (!it->is_array()) throw Error(Errc::InvalidArgument, "'texts' must be an array of strings");
      json results = json::array();
      for (const auto& t : *it) {
        if (!t.is_string()) throw Error(Errc::InvalidArgument, "'texts' must be an array of strings");
        results.push_back(classification_json(t.get<std::string>()));
      }
      send_json(res, {{"results", std::move(results)}});
      return;
    }
    send_json(res, classification_json(required_string(body, "text")));
  }

  std::vector<Post> cohort_posts(const experiment::Participant& p, Timestamp at) const {
    std::vector<Post> posts;
    if (p.control_cohort) {
      for (const auto& f : *p.control_cohort) {
        for (auto& post : store->posts_by(f)) {
          if (post.created_at <= at) posts.push_back(std::move(post));
        }
      }
    }
    std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
      return a.created_at != b.created_at ? a.created_at > b.created_at : a.id < b.id;
    });
    return posts;
  }

  void feed(const httplib::Request& req, httplib::Response& res) {
    const auto user = required_param(req, "user");
    const auto mode_text = req.has_param("mode") ? req.get_param_value("mode") : std::string("original");
    const auto mode = parse_view_mode(mode_text);
    if (!mode) throw Error(Errc::InvalidArgument, fmt::format("unknown view mode '{}'", mode_text));
    const auto at = time_param(req, "at", utc_now());
    std::size_t limit = kDefaultFeedLimit;
    if (req.has_param("limit")) limit = static_cast<std::size_t>(std::stoul(req.get_param_value("limit")));

    std::lock_guard lock(write_mutex);
    const auto p = require_participant(*store, user);
    auto posts = cohort_posts(p, at);
    if (posts.size() > limit) posts.resize(limit);
    const auto annotated = feed::annotate(model, posts, store->overrides_for(user));
    const auto items = feed::apply_view(annotated, *mode);

    auto [it, fresh] = sessions.try_emplace(user, feed::start_session(user, at));
    auto& session = it->second;
    std::optional<feed::ReminderEvent> reminder = feed::tick_dwell(session, at);
    if (reminder) store->record({"", user, at, experiment::events::Reminder{}});
    if (feed::switch_mode(session, *mode, at) || fresh) {
      store->record({"", user, at, experiment::events::ViewActivated{*mode}});
    }

    json list = json::array();
    for (const auto& item : items) list.push_back(display_json(item));
    send_json(res, {{"user", user},
                    {"mode", to_string(*mode)},
                    {"at", format_timestamp(at)},
                    {"reminder_active", session.reminder_active},
                    {"negative_dwell_seconds", session.negative_dwell.count()},
                    {"items", std::move(list)}});
  }

  void override_label(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto user = required_string(body, "user");
    const auto post_id = required_string(body, "post_id");
    const auto label = valence_field(body, "label");
    const auto at = time_field(body, "at", utc_now());

    std::lock_guard lock(write_mutex);
    require_participant(*store, user);
    const auto post = store->find_post(post_id);
    if (!post) throw Error(Errc::UnknownPost, fmt::format("unknown post '{}'", post_id));
    std::optional<Valence> current;
    if (auto existing = store->find_override(user, post_id)) {
      current = existing->label;
    } else if (!post->is_protected) {
      current = model.classify(post->classification_text()).label;
    }
    const auto result = feed::set_override(*store, store.get(), user, *post, label, current, at);
    send_json(res, {{"changed", result.changed},
                    {"user", result.record.user_id},
                    {"post_id", result.record.post_id},
                    {"label", to_string(result.record.label)},
                    {"at", format_timestamp(result.record.at)}});
  }

  void stats(const httplib::Request& req, httplib::Response& res) {
    const auto p = require_participant(*store, required_param(req, "user"));
    // Checked here as well as in personal_stats so the API never leaks
    // statistics even if the library check changes.
    if (p.group != experiment::TreatmentGroup::T1) {
      throw Error(Errc::StatsNotAvailable, "personal statistics are only available to T1 participants");
    }
    const auto w0 = window_bounds(p.installed_at, Window::W0);
    const TimeRange period{time_param(req, "from", w0.from), time_param(req, "to", w0.to)};
    const auto own = store->posts_by(p.id);
    const auto annotated = feed::annotate(model, own, store->overrides_for(p.id));
    const auto s = experiment::personal_stats(p, annotated, period);
    json counts;
    json percent;
    for (auto v : kAllValences) {
      counts[std::string(to_string(v))] = s.counts[index_of(v)];
      percent[std::string(to_string(v))] = s.percent[index_of(v)];
    }
    send_json(res, {{"user", p.id},
                    {"from", format_timestamp(period.from)},
                    {"to", format_timestamp(period.to)},
                    {"total", s.total},
                    {"empty", s.empty},
                    {"counts", counts},
                    {"percent", percent}});
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const json* list = &body;
    if (body.is_object()) {
      const auto it = body.find("events");
      if (it == body.end()) throw Error(Errc::InvalidArgument, "expected an array or {\"events\": [...]}");
      list = &*it;
    }
    if (!list->is_array()) throw Error(Errc::InvalidArgument, "events must be an array");

    std::vector<experiment::TelemetryEvent> batch;
    for (const auto& e : *list) {
      if (!e.is_object()) throw Error(Errc::InvalidArgument, "each event must be an object");
      experiment::TelemetryEvent ev;
      ev.participant_id = required_string(e, "participant_id");
      if (const auto id = e.find("id"); id != e.end() && id->is_string()) ev.id = id->get<std::string>();
      ev.at = parse_timestamp(required_string(e, "at"));
      const auto payload = e.contains("payload") ? e.at("payload") : json::object();
      ev.payload = store::payload_from_json(required_string(e, "kind"), payload);
      batch.push_back(std::move(ev));
    }

    std::lock_guard lock(write_mutex);
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
    json ids = json::array();
    for (auto& ev : batch) {
      require_participant(*store, ev.participant_id);
      if (auto* v = std::get_if<experiment::events::ViewActivated>(&ev.payload)) {
        auto [it, fresh] = sessions.try_emplace(ev.participant_id, feed::start_session(ev.participant_id, ev.at));
        feed::switch_mode(it->second, v->mode, ev.at);
      }
      const bool added = store->record(ev);
      added ? ++accepted : ++duplicates;
    }
    send_json(res, {{"accepted", accepted}, {"duplicates", duplicates}});
  }

  void enroll(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto handle = required_string(body, "handle");
    const bool is_protected = body.value("protected", false);
    const auto at = time_field(body, "at", utc_now());
    std::optional<std::vector<std::string>> friends;
    if (const auto it = body.find("friends"); it != body.end() && !it->is_null()) {
      friends = it->get<std::vector<std::string>>();
    }

    std::lock_guard lock(write_mutex);
    auto p = experiment::enroll(*store, assigner, handle, is_protected, at);
    if (friends) {
      const auto seed = config.assignment_seed ^ Fnv1a().update(p.id).value();
      p = experiment::assign_control_cohort(
          *store, p.id, experiment::sample_control(*friends, experiment::kControlCohortCap, seed));
    }
    send_json(res, participant_json(p), 201);
  }

  static analysis::SurveyPhase phase_of(const httplib::Request& req) {
    return req.matches[1] == "pre" ? analysis::SurveyPhase::Pre : analysis::SurveyPhase::Post;
  }

  static Timestamp available_at(const experiment::Participant& p, analysis::SurveyPhase phase) {
    return phase == analysis::SurveyPhase::Pre ? p.installed_at : p.installed_at + days(7);
  }

  static void require_available(const experiment::Participant& p, analysis::SurveyPhase phase, Timestamp at) {
    const auto from = available_at(p, phase);
    if (at < from) {
      throw Error(Errc::NotYetAvailable, fmt::format("the {} survey opens at {}", to_string(phase),
                                                     format_timestamp(from)));
    }
  }

  void survey_get(const httplib::Request& req, httplib::Response& res) {
    const auto phase = phase_of(req);
    const auto p = require_participant(*store, required_param(req, "user"));
    const auto at = time_param(req, "at", utc_now());
    const auto from = available_at(p, phase);
    if (at < from) {
      send_error(res, Errc::NotYetAvailable, "survey not yet available",
                 {{"available_at", format_timestamp(from)}});
      return;
    }
    const auto stored = store->find_survey(p.id, phase);
    json body{{"user", p.id},
              {"phase", to_string(phase)},
              {"available", true},
              {"available_at", format_timestamp(from)},
              {"submitted", stored.has_value()}};
    if (stored) {
      auto r = store::to_record(*stored);
      r.erase("schema_version");
      body["response"] = std::move(r);
    }
    send_json(res, body);
  }

  void survey_post(const httplib::Request& req, httplib::Response& res) {
    const auto phase = phase_of(req);
    auto body = parse_body(req);
    if (!body.is_object()) throw Error(Errc::InvalidArgument, "survey body must be an object");
    const auto user = body.contains("user") ? required_string(body, "user") : required_string(body, "participant_id");
    const auto at = time_field(body, "at", utc_now());

    std::lock_guard lock(write_mutex);
    const auto p = require_participant(*store, user);
    require_available(p, phase, at);
    body["schema_version"] = store::kSchemaVersion;
    body["participant_id"] = p.id;
    body["phase"] = to_string(phase);
    if (!body.contains("submitted_at")) body["submitted_at"] = format_timestamp(at);
    if (!body.contains("free_text")) body["free_text"] = "";
    analysis::SurveyResponse response;
    try {
      response = store::survey_from_record(body);
    } catch (const Error& e) {
      throw Error(Errc::InvalidSurvey, e.what());
    }
    const bool changed = store->put_survey(response);
    send_json(res, {{"stored", true}, {"changed", changed}, {"phq8", analysis::phq8_score(response.phq8).total}},
              201);
  }

  // Posts stored without a label (entered outside ingestion) are labeled
  // with the served model for the report only.
  store::Snapshot labeled_snapshot() const {
    auto snap = store->snapshot();
    std::set<std::string> labeled;
    for (const auto& l : snap.labels) labeled.insert(l.post_id);
    bool added = false;
    for (const auto& p : snap.posts) {
      if (p.is_protected || labeled.contains(p.id)) continue;
      const auto c = model.classify(p.classification_text());
      snap.labels.push_back({p.id, c.label, c.log_odds, model.fingerprint()});
      added = true;
    }
    if (added) {
      std::sort(snap.labels.begin(), snap.labels.end(),
                [](const PostLabel& a, const PostLabel& b) { return a.post_id < b.post_id; });
    }
    return snap;
  }

  void report(const httplib::Request& req, httplib::Response& res) {
    const auto format_text = req.has_param("format") ? req.get_param_value("format") : std::string("text");
    const auto format = analysis::parse_report_format(format_text);
    if (!format) throw Error(Errc::InvalidArgument, fmt::format("unknown report format '{}'", format_text));
    analysis::ReportOptions options;
    options.session_gap = config.session_gap;
    if (req.has_param("variant")) {
      const auto v = analysis::parse_variant(req.get_param_value("variant"));
      if (!v || (*v != analysis::TTestVariant::Welch && *v != analysis::TTestVariant::Pooled)) {
        throw Error(Errc::InvalidArgument, "variant must be welch or pooled");
      }
      options.two_sample_variant = *v;
    }
    options.pooled_shares = req.has_param("pooled") && req.get_param_value("pooled") == "true";
    const auto r = analysis::build_report(labeled_snapshot(), options);
    const char* type = *format == analysis::ReportFormat::Json  ? "application/json"
                       : *format == analysis::ReportFormat::Csv ? "text/csv"
                                                                : "text/plain; charset=utf-8";
    res.set_content(analysis::render(r, *format), type);
  }
};

namespace {

sentiment::SentimentModel load_or_fail(const ServiceConfig& config) {
  try {
    return sentiment::load_model(config.model_path);
  } catch (const Error& e) {
    throw Error(Errc::ModelLoadFailure,
                fmt::format("cannot load model '{}': {}", config.model_path.string(), e.what()));
  }
}

}  // namespace

Service::Service(ServiceConfig config) {
  config.validate();
  auto model = load_or_fail(config);
  auto s = std::make_shared<store::Store>(config.store_path);
  impl_ = std::make_unique<Impl>(std::move(config), std::move(model), std::move(s));
}

Service::Service(ServiceConfig config, sentiment::SentimentModel model, std::shared_ptr<store::Store> store) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config), std::move(model), std::move(store));
}

Service::~Service() {
  try {
    stop();
  } catch (...) {
  }
}

int Service::bind() {
  auto& i = *impl_;
  if (i.config.port == 0) {
    i.port = i.server.bind_to_any_port(i.config.host);
  } else {
    i.port = i.server.bind_to_port(i.config.host, i.config.port) ? i.config.port : -1;
  }
  if (i.port < 0) {
    throw Error(Errc::BindFailure, fmt::format("cannot bind {}:{}", i.config.host, i.config.port));
  }
  return i.port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  auto& i = *impl_;
  if (i.stopped) return;
  i.stopped = true;
  i.server.stop();
  if (i.thread.joinable()) i.thread.join();
  std::lock_guard lock(i.write_mutex);
  i.store->flush();
}

store::Store& Service::store() { return *impl_->store; }

const sentiment::SentimentModel& Service::model() const { return impl_->model; }

}  // namespace moodifier::gateway
