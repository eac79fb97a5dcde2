#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/experiment/synthetic_study.hpp"
#include "moodifier/store/feed_source.hpp"
#include "moodifier/store/ingest.hpp"
#include "moodifier/store/store.hpp"

using namespace moodifier;
using namespace moodifier::store;
using moodifier::testing::make_post;
using moodifier::testing::TempDir;
using moodifier::testing::tiny_model;
using moodifier::testing::ts;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

std::vector<std::vector<Post>> pages_for(const std::string& user, std::size_t pages, std::size_t per_page,
                                         Timestamp start) {
  std::vector<std::vector<Post>> out(pages);
  std::size_t k = 0;
  for (auto& page : out) {
    for (std::size_t i = 0; i < per_page; ++i, ++k) {
      page.push_back(make_post(fmt::format("{}-{:04}", user, k), user,
                               k % 3 == 0 ? "love great day" : (k % 3 == 1 ? "sad awful news" : "meeting"),
                               start + Seconds{static_cast<long long>(60 * k)}, k % 17 == 5));
    }
  }
  return out;
}

void populate(Store& st) {
  const auto study = [] {
    auto spec = experiment::StudySpec::published_defaults();
    spec.t1_users = 4;
    spec.t2_users = 4;
    spec.protected_users = 1;
    spec.control_users = 12;
    return experiment::generate_synthetic_study(spec, 21);
  }();
  load_study(st, study);
}

}  // namespace

TEST_CASE("records round-trip through JSON") {
  auto post = make_post("x1", "u", "hello \"world\"\n", ts("2019-03-01T10:00:00Z"));
  post.quoted_text = "quoted";
  CHECK(post_from_record(to_record(post)) == post);

  const PostLabel label{"x1", Valence::Negative, -2.5, "abcd"};
  CHECK(label_from_record(to_record(label)) == label);

  experiment::Participant p{"p00001", "alice", experiment::TreatmentGroup::T2, ts("2019-03-01T10:00:00Z"),
                            true, std::vector<std::string>{"f1", "f2"}};
  CHECK(participant_from_record(to_record(p)) == p);

  const feed::OverrideRecord o{"p00001", "x1", Valence::Positive, ts("2019-03-02T00:00:00Z")};
  CHECK(override_from_record(to_record(o)) == o);

  for (const experiment::EventPayload& payload :
       {experiment::EventPayload{experiment::events::ViewActivated{ViewMode::NegativeOnly}},
        experiment::EventPayload{experiment::events::PostsDisplayed{7}},
        experiment::EventPayload{experiment::events::Relabel{"x1", std::nullopt, Valence::Neutral}},
        experiment::EventPayload{experiment::events::Relabel{"x1", Valence::Positive, Valence::Neutral}},
        experiment::EventPayload{experiment::events::StatsViewed{}},
        experiment::EventPayload{experiment::events::Reminder{}}}) {
    const experiment::TelemetryEvent e{"p00001:000003", "p00001", ts("2019-03-02T00:00:00Z"), payload};
    CHECK(event_from_record(to_record(e)) == e);
  }

  analysis::SurveyResponse s;
  s.participant_id = "p00001";
  s.phase = analysis::SurveyPhase::Post;
  s.submitted_at = ts("2019-03-09T00:00:00Z");
  s.questions = {1, 20, 30, 40, 50, 60, 100};
  s.emoji = "sad";
  s.own_valence = Valence::Neutral;
  s.phq8 = {0, 1, 2, 3, 0, 1, 2, 3};
  s.free_text = "fine";
  CHECK(survey_from_record(to_record(s)) == s);

  for (auto t : kAllTables) CHECK(parse_table(to_string(t)) == t);
}

TEST_CASE("decoders reject malformed records") {
  auto j = to_record(make_post("x", "u", "t", ts("2019-03-01T00:00:00Z")));
  auto missing = j;
  missing.erase("author_id");
  CHECK(code_of([&] { post_from_record(missing); }) == Errc::CorruptRecord);
  auto wrong_type = j;
  wrong_type["created_at"] = 5;
  CHECK(code_of([&] { post_from_record(wrong_type); }) == Errc::CorruptRecord);
  auto version = j;
  version["schema_version"] = 99;
  CHECK(code_of([&] { post_from_record(version); }) == Errc::CorruptRecord);
}

TEST_CASE("upserts are idempotent and protected posts never carry valences") {
  Store st;
  const auto t = ts("2019-03-01T00:00:00Z");
  CHECK(st.put_post(make_post("a", "u", "love", t)));
  CHECK_FALSE(st.put_post(make_post("a", "u", "love", t)));
  CHECK(st.put_label({"a", Valence::Positive, 2.0, "m"}));
  CHECK(code_of([&] { st.put_label({"zzz", Valence::Positive, 2.0, "m"}); }) == Errc::UnknownPost);

  st.put_override({"p1", "a", Valence::Negative, t});
  CHECK(st.find_override("p1", "a").has_value());

  // Becoming protected drops the label and the override.
  CHECK(st.put_post(make_post("a", "u", "love", t, true)));
  CHECK_FALSE(st.find_label("a").has_value());
  CHECK_FALSE(st.find_override("p1", "a").has_value());
  CHECK(code_of([&] { st.put_label({"a", Valence::Positive, 2.0, "m"}); }) == Errc::PrivacyViolation);
  CHECK(code_of([&] { st.put_override({"p1", "a", Valence::Negative, t}); }) == Errc::PrivacyViolation);
  CHECK(st.size(Table::Labels) == 0);
  CHECK(st.size(Table::Overrides) == 0);
}

TEST_CASE("fingerprint is independent of insertion order") {
  const auto t = ts("2019-03-01T00:00:00Z");
  std::vector<Post> posts;
  for (int i = 0; i < 30; ++i) posts.push_back(make_post("id" + std::to_string(i), "u", "text", t + Seconds{i}));
  Store a;
  Store b;
  for (const auto& p : posts) a.put_post(p);
  std::mt19937_64 rng(1);
  std::shuffle(posts.begin(), posts.end(), rng);
  for (const auto& p : posts) b.put_post(p);
  CHECK(a.fingerprint() == b.fingerprint());
  b.put_post(make_post("extra", "u", "text", t));
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("stores persist to a directory and reload identically") {
  TempDir dir;
  std::string fp;
  {
    Store st{dir.path()};
    populate(st);
    fp = st.fingerprint();
    st.flush();
  }
  for (auto t : kAllTables) CHECK(std::filesystem::exists(dir / (std::string(to_string(t)) + ".ndjson")));
  Store reloaded{dir.path()};
  CHECK(reloaded.fingerprint() == fp);

  // Telemetry ids survive the reload, so resubmission is still a duplicate.
  const auto events = reloaded.snapshot().events;
  REQUIRE_FALSE(events.empty());
  CHECK_FALSE(reloaded.record(events.front()));
}

TEST_CASE("bundles round-trip every table") {
  Store a;
  populate(a);
  std::stringstream buf;
  a.write_bundle(buf);
  Store b;
  b.read_bundle(buf);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(b.size(Table::Surveys) == a.size(Table::Surveys));
}

TEST_CASE("a corrupt line is reported by number and nothing is applied") {
  Store st;
  std::stringstream good;
  good << to_record(make_post("a", "u", "t", ts("2019-03-01T00:00:00Z"))).dump() << "\n";
  good << to_record(make_post("b", "u", "t", ts("2019-03-01T00:00:00Z"))).dump() << "\n";
  good << "{\"schema_version\":1,\"id\":\"c\"\n";
  try {
    st.load_table(Table::Posts, good);
    FAIL("expected CorruptRecordError");
  } catch (const CorruptRecordError& e) {
    CHECK(e.line() == 3);
  }
  CHECK(st.post_count() == 0);

  std::stringstream not_json("\n\nnot json\n");
  try {
    st.load_table(Table::Posts, not_json);
    FAIL("expected CorruptRecordError");
  } catch (const CorruptRecordError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("a file that labels a protected post is rejected before any mutation") {
  Store st;
  st.put_post(make_post("a", "u", "t", ts("2019-03-01T00:00:00Z"), true));
  std::stringstream labels;
  labels << to_record(PostLabel{"a", Valence::Positive, 1.0, "m"}).dump() << "\n";
  CHECK(code_of([&] { st.load_table(Table::Labels, labels); }) == Errc::PrivacyViolation);
  CHECK(st.size(Table::Labels) == 0);
}

TEST_CASE("ingestion pages through a timeline and is idempotent") {
  ScriptedFeedSource src;
  const auto start = ts("2019-03-01T00:00:00Z");
  src.set_timeline("alice", pages_for("alice", 3, 50, start));
  Store st;
  const auto model = tiny_model();
  const auto to = start + days(30);
  CHECK(ingest_timeline(src, st, "alice", start, to, &model) == 150);
  CHECK(st.post_count() == 150);
  const auto fp = st.fingerprint();
  CHECK(ingest_timeline(src, st, "alice", start, to, &model) == 0);
  CHECK(st.fingerprint() == fp);

  std::size_t labeled = 0;
  for (const auto& p : st.posts_by("alice")) {
    const auto l = st.find_label(p.id);
    CHECK(l.has_value() == !p.is_protected);
    if (l) {
      ++labeled;
      CHECK(l->source == model.fingerprint());
    }
  }
  CHECK(labeled == st.size(Table::Labels));
  CHECK(code_of([&] { ingest_timeline(src, st, "alice", to, start); }) == Errc::InvalidRange);
}

TEST_CASE("ingestion keeps only posts inside the range") {
  ScriptedFeedSource src;
  const auto start = ts("2019-03-01T00:00:00Z");
  src.set_timeline("bob", pages_for("bob", 2, 10, start));
  Store st;
  CHECK(ingest_timeline(src, st, "bob", start + Seconds{60 * 5}, start + Seconds{60 * 15}) == 10);
}

TEST_CASE("faults propagate and a rerun resumes idempotently") {
  ScriptedFeedSource src;
  const auto start = ts("2019-03-01T00:00:00Z");
  src.set_timeline("c", pages_for("c", 3, 50, start));
  Store st;
  src.inject_fault(ScriptedFeedSource::Fault::RateLimited, std::chrono::seconds{42});
  try {
    ingest_timeline(src, st, "c", start, start + days(30));
    FAIL("expected RateLimitedError");
  } catch (const RateLimitedError& e) {
    CHECK(e.retry_after().count() == 42);
  }
  src.inject_fault(ScriptedFeedSource::Fault::Unavailable);
  CHECK(code_of([&] { ingest_timeline(src, st, "c", start, start + days(30)); }) == Errc::SourceUnavailable);
  CHECK(ingest_timeline(src, st, "c", start, start + days(30)) == 150);

  Store clean;
  ScriptedFeedSource fresh;
  fresh.set_timeline("c", pages_for("c", 3, 50, start));
  ingest_timeline(fresh, clean, "c", start, start + days(30));
  CHECK(clean.fingerprint() == st.fingerprint());
}

TEST_CASE("friend lists are deduplicated") {
  ScriptedFeedSource src;
  src.set_friends("a", {"x", "y", "x", "z", "y"});
  CHECK(fetch_friends_capped(src, "a") == std::vector<std::string>{"x", "y", "z"});
  CHECK(code_of([&] { fetch_friends_capped(src, "nobody"); }) == Errc::SourceUnavailable);
}

TEST_CASE("directory sources page in creation order") {
  TempDir dir;
  const auto start = ts("2019-03-01T00:00:00Z");
  {
    std::ofstream out(dir / "posts.ndjson");
    for (int i = 119; i >= 0; --i) {
      out << to_record(make_post(fmt::format("d{:03}", i), "dana", "text", start + Seconds{i})).dump() << "\n";
    }
    std::ofstream friends(dir / "friends.json");
    friends << R"({"dana": ["e", "f", "e"]})";
  }
  DirectoryFeedSource src(dir.path(), 50);
  const auto first = src.fetch_timeline("dana", start, start + days(1), std::nullopt);
  REQUIRE(first.posts.size() == 50);
  CHECK(first.posts.front().id == "d000");
  REQUIRE(first.next_token.has_value());
  Store st;
  CHECK(ingest_timeline(src, st, "dana", start, start + days(1)) == 120);
  CHECK(fetch_friends_capped(src, "dana") == std::vector<std::string>{"e", "f"});
}
