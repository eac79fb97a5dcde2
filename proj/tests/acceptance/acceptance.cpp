// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "moodifier/analysis/report.hpp"
#include "moodifier/analysis/survey.hpp"
#include "moodifier/analysis/ttest.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/experiment/personal_stats.hpp"
#include "moodifier/experiment/synthetic_study.hpp"
#include "moodifier/feed/annotate.hpp"
#include "moodifier/feed/overrides.hpp"
#include "moodifier/feed/session.hpp"
#include "moodifier/gateway/service.hpp"
#include "moodifier/sentiment/model.hpp"
#include "moodifier/sentiment/synthetic_corpus.hpp"
#include "moodifier/store/feed_source.hpp"
#include "moodifier/store/ingest.hpp"
#include "moodifier/store/store.hpp"

using namespace moodifier;
using moodifier::testing::make_post;
using moodifier::testing::TempDir;
using moodifier::testing::tiny_model;
using moodifier::testing::ts;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed sub-checks of one criterion.
struct Checks {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class Fn>
  void expect_code(Errc expected, const std::string& what, Fn&& fn) {
    try {
      fn();
      failures.push_back(what + ": no error");
    } catch (const Error& e) {
      if (e.code() != expected) failures.push_back(fmt::format("{}: got {}", what, to_string(e.code())));
    }
  }
  bool ok() const { return failures.empty(); }
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Verdict> g_verdicts;

void record(std::string name, bool pass, std::string detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  g_verdicts.push_back({std::move(name), pass, std::move(detail)});
}

void info(const std::string& line) {
  std::printf("INFO  %s\n", line.c_str());
  std::fflush(stdout);
}

std::string first_failures(const Checks& c) {
  std::string out;
  for (std::size_t i = 0; i < c.failures.size() && i < 3; ++i) out += "; " + c.failures[i];
  return out;
}

// Runs a criterion body, turning an unexpected exception into a failure.
void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    record(name, false, fmt::format("unexpected exception: {}", e.what()));
  }
}

// ---------------------------------------------------------------- classifier

void classifier_accuracy() {
  const auto start = Clock::now();
  const auto& lexicon = sentiment::EmoticonLexicon::builtin();
  sentiment::SyntheticCorpusOptions opts;
  opts.size = 12000;
  opts.seed = 20190301;
  const auto texts = sentiment::synthesize_emoticon_corpus(opts, lexicon);
  auto instances = sentiment::build_distant_corpus(texts, lexicon);
  std::mt19937_64 rng(20190301);
  std::shuffle(instances.begin(), instances.end(), rng);
  const auto cut = instances.size() - instances.size() / 10;
  const std::vector<sentiment::TrainingInstance> train(instances.begin(), instances.begin() + cut);
  const std::vector<sentiment::TrainingInstance> holdout(instances.begin() + cut, instances.end());
  const auto model = sentiment::SentimentModel::train(train, 0.0);

  std::size_t correct = 0;
  Checks c;
  for (const auto& inst : holdout) {
    const auto got = model.classify_tokens(inst.tokens);
    const auto want = inst.label == sentiment::Polarity::Positive ? Valence::Positive : Valence::Negative;
    if (got.label == want) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(holdout.size());

  // Independent posterior: sum the stored log-likelihoods by hand.
  for (std::size_t i = 0; i < holdout.size() && i < 300; ++i) {
    const auto& tokens = holdout[i].tokens;
    long double pos = model.log_prior(sentiment::Polarity::Positive);
    long double neg = model.log_prior(sentiment::Polarity::Negative);
    bool known = false;
    for (const auto& tok : tokens) {
      const auto it = model.likelihoods().find(tok);
      if (it == model.likelihoods().end()) continue;
      known = true;
      pos += it->second[0];
      neg += it->second[1];
    }
    const double expected = known ? static_cast<double>(pos - neg) : 0.0;
    const auto got = model.classify_tokens(tokens);
    c.require(std::abs(got.log_odds - expected) <= 1e-9, fmt::format("posterior mismatch on instance {}", i));

    auto reversed = tokens;
    std::reverse(reversed.begin(), reversed.end());
    c.require(std::abs(model.classify_tokens(reversed).log_odds - got.log_odds) <= 1e-9,
              fmt::format("order dependence on instance {}", i));
  }
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& text = texts[i];
    const auto base = model.classify(text + " plain");
    c.require(std::abs(model.classify(text + " plain :)").log_odds - base.log_odds) <= 1e-12 &&
                  std::abs(model.classify(text + " plain :(").log_odds - base.log_odds) <= 1e-12,
              fmt::format("emoticon changed the score of text {}", i));
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 60.0, fmt::format("took {:.1f} s", elapsed));
  c.require(accuracy >= 0.75, fmt::format("accuracy {:.4f} < 0.75", accuracy));
  record("classifier", c.ok(),
         fmt::format("accuracy {:.4f} on {} held-out of {} instances (tau 0), {:.1f} s{}", accuracy,
                     holdout.size(), instances.size(), elapsed, first_failures(c)));
}

// ---------------------------------------------------------------- round trip

analysis::Report report_for(const experiment::StudySpec& spec, std::uint64_t seed) {
  const auto study = experiment::generate_synthetic_study(spec, seed);
  store::Store st;
  store::load_study(st, study);
  return analysis::build_report(st.snapshot());
}

void table_round_trip() {
  const auto start = Clock::now();
  auto spec = experiment::StudySpec::published_defaults();
  spec.control_users = 5000;
  const auto report = report_for(spec, 20190301);

  Checks c;
  double worst_control = 0.0;
  double worst_t1 = 0.0;
  auto compare = [&](const char* group, experiment::Cohort cohort, Window w, double tolerance, double& worst) {
    const auto* row = report.find_share(group, w);
    if (row == nullptr || !row->summary) {
      c.require(false, fmt::format("{} {} missing", group, to_string(w)));
      return;
    }
    const auto planted = spec.cells.at({cohort, w}).mean.as_array();
    for (auto v : kAllValences) {
      const double d = std::abs(row->summary->mean_of(v) - planted[index_of(v)]);
      worst = std::max(worst, d);
      c.require(d <= tolerance, fmt::format("{} {} {} off by {:.2f}", group, to_string(w), to_string(v), d));
    }
  };
  for (auto w : kAllWindows) compare("control", experiment::Cohort::Control, w, 1.0, worst_control);
  compare("T1", experiment::Cohort::T1, Window::Wm1, 6.0, worst_t1);
  const double elapsed = seconds_since(start);
  c.require(elapsed < 30.0, fmt::format("took {:.1f} s", elapsed));
  record("share round trip", c.ok(),
         fmt::format("control max |error| {:.2f} pp (<= 1.0), T1 W-1 max |error| {:.2f} pp (<= 6.0), {:.1f} s{}",
                     worst_control, worst_t1, elapsed, first_failures(c)));
}

// ---------------------------------------------------------------- t-test oracle

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += v;
  const long double m = s / x.size();
  long double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return {static_cast<double>(m), static_cast<double>(ss / (x.size() - 1))};
}

double two_sided(double t, double dof) {
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(dof), std::abs(t)));
}

void ttest_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(2, 50);
  std::uniform_real_distribution<double> loc(-50.0, 50.0);
  std::uniform_real_distribution<double> scale(0.5, 30.0);
  Checks c;
  double worst_p = 0.0;
  bool any_nan = false;

  auto check = [&](const analysis::TTestResult& got, double t, double dof, const char* label, int i) {
    const double p = two_sided(t, dof);
    if (std::isnan(got.t) || std::isnan(got.p) || std::isnan(got.dof)) any_nan = true;
    worst_p = std::max(worst_p, std::abs(got.p - p));
    c.require(std::abs(got.p - p) <= 1e-6, fmt::format("{} pair {}: p {} vs {}", label, i, got.p, p));
    c.require(std::abs(got.t - t) <= 1e-9 * std::max(1.0, std::abs(t)),
              fmt::format("{} pair {}: t {} vs {}", label, i, got.t, t));
    c.require(std::abs(got.dof - dof) <= 1e-9 * std::max(1.0, dof),
              fmt::format("{} pair {}: dof {} vs {}", label, i, got.dof, dof));
  };

  for (int i = 0; i < 200; ++i) {
    const auto na = static_cast<std::size_t>(size(rng));
    const auto nb = static_cast<std::size_t>(size(rng));
    std::normal_distribution<double> da(loc(rng), scale(rng));
    std::normal_distribution<double> db(loc(rng), scale(rng));
    std::vector<double> a(na);
    std::vector<double> b(nb);
    for (auto& v : a) v = da(rng);
    for (auto& v : b) v = db(rng);
    // Every fourth pair uses rounded values so ties occur.
    if (i % 4 == 0) {
      for (auto& v : a) v = std::round(v);
      for (auto& v : b) v = std::round(v);
    }
    const auto ma = moments(a);
    const auto mb = moments(b);
    const double ra = ma.var / na;
    const double rb = mb.var / nb;

    const double t_welch = (ma.mean - mb.mean) / std::sqrt(ra + rb);
    const double dof_welch = (ra + rb) * (ra + rb) / (ra * ra / (na - 1) + rb * rb / (nb - 1));
    check(analysis::two_sample_t(a, b, analysis::TTestVariant::Welch), t_welch, dof_welch, "welch", i);

    const double sp2 = ((na - 1) * ma.var + (nb - 1) * mb.var) / static_cast<double>(na + nb - 2);
    const double t_pooled = (ma.mean - mb.mean) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    check(analysis::two_sample_t(a, b, analysis::TTestVariant::Pooled), t_pooled,
          static_cast<double>(na + nb - 2), "pooled", i);

    std::vector<double> post(na);
    std::normal_distribution<double> shift(loc(rng) / 10.0, scale(rng));
    for (std::size_t k = 0; k < na; ++k) post[k] = a[k] + shift(rng);
    std::vector<double> diff(na);
    for (std::size_t k = 0; k < na; ++k) diff[k] = post[k] - a[k];
    const auto md = moments(diff);
    const double t_paired = md.mean / std::sqrt(md.var / na);
    check(analysis::paired_t(a, post), t_paired, static_cast<double>(na - 1), "paired", i);

    const auto same = analysis::two_sample_t(a, a);
    c.require(same.t == 0.0 && same.p == 1.0, fmt::format("identical samples {}: t {} p {}", i, same.t, same.p));
    const auto same_paired = analysis::paired_t(a, a);
    c.require(same_paired.t == 0.0 && same_paired.p == 1.0, fmt::format("identical paired samples {}", i));
  }

  // Degenerate inputs raise typed errors instead of producing NaN.
  const std::vector<double> flat1{3, 3, 3};
  const std::vector<double> flat2{5, 5, 5, 5};
  const std::vector<double> one{1};
  const std::vector<double> ok{1, 2, 3};
  const std::vector<double> with_nan{1, std::nan(""), 3};
  const std::vector<double> with_inf{1, HUGE_VAL, 3};
  for (auto variant : {analysis::TTestVariant::Welch, analysis::TTestVariant::Pooled}) {
    c.expect_code(Errc::DegenerateVariance, "constant samples", [&] { analysis::two_sample_t(flat1, flat2, variant); });
    c.expect_code(Errc::InsufficientData, "single value", [&] { analysis::two_sample_t(one, ok, variant); });
    c.expect_code(Errc::NonFiniteValue, "nan input", [&] { analysis::two_sample_t(with_nan, ok, variant); });
    c.expect_code(Errc::NonFiniteValue, "inf input", [&] { analysis::two_sample_t(ok, with_inf, variant); });
  }
  const std::vector<double> shifted{4, 5, 6};
  c.expect_code(Errc::DegenerateVariance, "constant differences", [&] { analysis::paired_t(ok, shifted); });
  c.expect_code(Errc::LengthMismatch, "paired lengths", [&] { analysis::paired_t(ok, flat2); });
  c.expect_code(Errc::InsufficientData, "paired single", [&] { analysis::paired_t(one, one); });
  c.require(!any_nan, "NaN in a result");

  const double elapsed = seconds_since(start);
  c.require(elapsed < 10.0, fmt::format("took {:.1f} s", elapsed));
  record("t-test oracle", c.ok(),
         fmt::format("200 random pairs x 3 variants, max |dp| {:.2e} (<= 1e-6), degenerate cases typed, {:.2f} s{}",
                     worst_p, elapsed, first_failures(c)));
}

// ---------------------------------------------------------------- power

experiment::StudySpec power_spec(double persistence, bool null_effect) {
  auto spec = experiment::StudySpec::published_defaults();
  spec.with_published_spread();
  spec.t1_users = 24;
  spec.t2_users = 4;
  spec.protected_users = 0;
  spec.control_users = 40;
  spec.persistence = persistence;
  spec.surveys.enabled = false;
  spec.engagement.enabled = false;
  if (null_effect) spec.cells[{experiment::Cohort::T1, Window::W0}] = spec.cells[{experiment::Cohort::T1, Window::Wm1}];
  return spec;
}

struct PowerRun {
  std::size_t rejected = 0;
  std::size_t missing = 0;
  std::size_t reps = 0;
  double rate() const { return static_cast<double>(rejected) / static_cast<double>(reps); }
};

PowerRun rejection_rate(const experiment::StudySpec& spec, std::size_t reps, std::uint64_t seed_base) {
  PowerRun run;
  run.reps = reps;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto report = report_for(spec, seed_base + r);
    const auto* test = report.find_test("T1 W-1 vs T1 W0", Valence::Neutral);
    if (test == nullptr || !test->result) {
      ++run.missing;
      continue;
    }
    if (test->result->p < analysis::kSignificanceLevel) ++run.rejected;
  }
  return run;
}

void power() {
  const auto start = Clock::now();
  constexpr std::size_t kReps = 500;
  const auto effect = rejection_rate(power_spec(0.9, false), kReps, 1'000'000);
  const auto null = rejection_rate(power_spec(0.9, true), kReps, 2'000'000);
  const auto independent = rejection_rate(power_spec(0.0, false), kReps, 3'000'000);
  Checks c;
  c.require(effect.rate() >= 0.80, fmt::format("power {:.3f} < 0.80", effect.rate()));
  c.require(null.rate() <= 0.05, fmt::format("null rejection rate {:.3f} > 0.05", null.rate()));
  c.require(effect.missing + null.missing == 0, "paired test missing from some reports");
  info(fmt::format("power with independent windows (persistence 0): {:.3f} over {} replications",
                   independent.rate(), kReps));
  record("power", c.ok(),
         fmt::format("paired neutral T1 W-1 vs W0, 24 users, persistence 0.9: power {:.3f} (>= 0.80), "
                     "null rejection {:.3f} (<= 0.05), {} replications each, {:.1f} s{}",
                     effect.rate(), null.rate(), kReps, seconds_since(start), first_failures(c)));
}

// ---------------------------------------------------------------- protocol invariants

const Timestamp kInstall = parse_timestamp("2019-03-15T00:00:00Z");

std::shared_ptr<store::Store> service_store() {
  auto st = std::make_shared<store::Store>();
  st->put_participant({"p00001", "alice", experiment::TreatmentGroup::T1, kInstall, false,
                       std::vector<std::string>{"f1", "f2"}});
  st->put_participant({"p00002", "bob", experiment::TreatmentGroup::T2, kInstall, false,
                       std::vector<std::string>{"f1", "f2"}});
  const char* texts[] = {"love great happy", "hate awful sad", "meeting at noon", "so happy glad"};
  for (int i = 0; i < 12; ++i) {
    st->put_post(make_post(fmt::format("f-{:02}", i), i % 2 ? "f1" : "f2", texts[i % 4],
                           kInstall - days(1) + Seconds{600 * i}));
  }
  st->put_post(make_post("f-prot", "f1", "love love love", kInstall - days(1), true));
  st->put_post(make_post("own-1", "p00001", "love great day", kInstall + Seconds{3600}));
  st->put_post(make_post("own-2", "p00002", "sad tired", kInstall + Seconds{7200}));
  return st;
}

struct LiveService {
  std::shared_ptr<store::Store> store = service_store();
  gateway::Service service;
  httplib::Client client;

  LiveService() : service(config(), tiny_model(), store), client("127.0.0.1", service.start()) {
    client.set_read_timeout(10, 0);
  }
  ~LiveService() { service.stop(); }

  static gateway::ServiceConfig config() {
    gateway::ServiceConfig c;
    c.port = 0;
    return c;
  }
};

void stats_refused_for_t2(Checks& c, LiveService& live) {
  experiment::Participant t2{"p00002", "bob", experiment::TreatmentGroup::T2, kInstall, false, std::nullopt};
  const std::vector<feed::AnnotatedPost> none;
  for (auto w : kAllWindows) {
    c.expect_code(Errc::StatsNotAvailable, "library T2 window",
                  [&] { experiment::personal_stats(t2, none, window_bounds(kInstall, w)); });
  }
  c.expect_code(Errc::StatsNotAvailable, "library T2 empty period",
                [&] { experiment::personal_stats(t2, none, TimeRange{kInstall, kInstall}); });

  const std::vector<std::string> queries{
      "/stats?user=p00002",
      "/stats?user=p00002&from=2019-03-01T00:00:00Z&to=2019-04-01T00:00:00Z",
      "/stats?user=p00002&from=2019-03-15T00:00:00Z&to=2019-03-15T00:00:00Z",
      "/stats?user=p00002&from=2019-03-20T00:00:00Z&to=2019-03-10T00:00:00Z",
  };
  for (const auto& q : queries) {
    const auto res = live.client.Get(q);
    c.require(res && res->status == 403 && json::parse(res->body)["error"] == "stats_not_available",
              fmt::format("HTTP {} not refused", q));
  }
  const auto t1 = live.client.Get("/stats?user=p00001");
  c.require(t1 && t1->status == 200, "HTTP stats for T1 not served");
}

void no_protected_valence(Checks& c, LiveService& live) {
  // Generated study with protected participants, plus an ingest of a timeline
  // that mixes protected and public posts.
  auto spec = experiment::StudySpec::published_defaults();
  spec.control_users = 100;
  const auto study = experiment::generate_synthetic_study(spec, 11);
  store::Store st;
  store::load_study(st, study);

  const auto model = tiny_model();
  store::ScriptedFeedSource src;
  std::vector<std::vector<Post>> pages(4);
  for (int i = 0; i < 80; ++i) {
    pages[i / 20].push_back(make_post(fmt::format("ing-{:03}", i), "ingested", i % 2 ? "love great" : "hate sad",
                                      kInstall + Seconds{i}, i % 3 == 0));
  }
  src.set_timeline("ingested", pages);
  store::ingest_timeline(src, st, "ingested", kInstall, kInstall + days(1), &model);

  // Direct writes targeting protected posts are rejected.
  c.expect_code(Errc::PrivacyViolation, "label on protected post",
                [&] { st.put_label({"ing-000", Valence::Positive, 1.0, "manual"}); });
  c.expect_code(Errc::PrivacyViolation, "override on protected post",
                [&] { st.put_override({"p00001", "ing-000", Valence::Positive, kInstall}); });
  c.expect_code(Errc::OverrideOnProtected, "relabel of protected post", [&] {
    feed::set_override(st, &st, "p00001", *st.find_post("ing-000"), Valence::Negative, std::nullopt, kInstall);
  });

  // A labeled, overridden post that becomes protected loses both.
  auto flip = *st.find_post("ing-001");
  st.put_override({"p00001", flip.id, Valence::Neutral, kInstall});
  flip.is_protected = true;
  st.put_post(flip);

  const auto snap = st.snapshot();
  std::set<std::string> protected_ids;
  for (const auto& p : snap.posts) {
    if (p.is_protected) protected_ids.insert(p.id);
  }
  std::size_t offending = 0;
  for (const auto& l : snap.labels) offending += protected_ids.contains(l.post_id) ? 1 : 0;
  for (const auto& o : snap.overrides) offending += protected_ids.contains(o.post_id) ? 1 : 0;
  c.require(!protected_ids.empty(), "no protected posts exercised");
  c.require(offending == 0, fmt::format("{} labels/overrides on protected posts", offending));

  // The classifier never labels a protected post on the way out either.
  const auto annotated = feed::annotate(model, snap.posts, {});
  for (const auto& a : annotated) {
    if (a.post.is_protected && (a.machine || a.effective())) {
      c.require(false, fmt::format("protected post {} annotated", a.post.id));
      break;
    }
  }

  const auto res = live.client.Post(
      "/override", json{{"user", "p00001"}, {"post_id", "f-prot"}, {"label", "positive"}}.dump(), "application/json");
  c.require(res && res->status == 422, "HTTP override on protected post not rejected");
  const auto feed = live.client.Get("/feed?user=p00001&mode=mood_colors&at=2019-03-16T00:00:00Z");
  c.require(feed && feed->status == 200, "HTTP feed failed");
  if (feed && feed->status == 200) {
    const auto body = json::parse(feed->body);
    for (const auto& item : body["items"]) {
      if (item["protected"].get<bool>()) {
        c.require(item["machine"].is_null() && item["effective"].is_null() && item["color"] == "none",
                  "HTTP feed exposes a valence for a protected post");
      }
    }
  }
  const auto live_snap = live.store->snapshot();
  for (const auto& o : live_snap.overrides) c.require(o.post_id != "f-prot", "service stored a protected override");
}

// Tick-by-tick oracle for the dwell reminder.
void reminder_rule(Checks& c) {
  const Timestamp t0 = kInstall;
  for (int d = 0; d <= 1800; ++d) {
    auto s = feed::start_session("u", t0);
    feed::switch_mode(s, ViewMode::NegativeOnly, t0);
    const auto fired = feed::tick_dwell(s, t0 + Seconds{d});
    c.require(fired.has_value() == (d > 900), fmt::format("single tick at dwell {}", d));
    const auto again = feed::tick_dwell(s, t0 + Seconds{d + 3600});
    c.require(!(fired && again), fmt::format("second reminder in one stay (dwell {})", d));
  }

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> step(1, 400);
  std::uniform_int_distribution<int> action(0, 9);
  std::uniform_int_distribution<int> mode_pick(0, 3);
  std::size_t total_fired = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    auto s = feed::start_session("u", t0);
    Timestamp now = t0;
    ViewMode mode = ViewMode::Original;
    Timestamp entered = t0;
    bool fired_in_stay = false;
    std::size_t expected = 0;
    std::size_t got = 0;
    for (int k = 0; k < 60; ++k) {
      now += Seconds{step(rng)};
      if (action(rng) < 2) {
        const auto next = kAllViewModes[static_cast<std::size_t>(mode_pick(rng))];
        feed::switch_mode(s, next, now);
        if (next != mode) {
          mode = next;
          entered = now;
          fired_in_stay = false;
        }
      } else {
        const bool should = mode == ViewMode::NegativeOnly && !fired_in_stay && now - entered > Seconds{900};
        if (should) {
          fired_in_stay = true;
          ++expected;
        }
        const auto r = feed::tick_dwell(s, now);
        if (r) ++got;
        if (r.has_value() != should) {
          c.require(false, fmt::format("random schedule {} step {} disagrees with the rule", trial, k));
          break;
        }
      }
    }
    c.require(expected == got, fmt::format("random schedule {}: {} reminders, expected {}", trial, got, expected));
    total_fired += got;
  }
  c.require(total_fired > 0, "random schedules never reached the limit");
}

void override_locality(Checks& c, LiveService& live) {
  const auto model = tiny_model();
  store::Store st;
  std::vector<Post> posts;
  for (int i = 0; i < 40; ++i) {
    posts.push_back(make_post(fmt::format("loc-{:02}", i), "f", i % 2 ? "love great" : "hate sad",
                              kInstall + Seconds{i}));
    st.put_post(posts.back());
  }
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto& post = posts[rng() % posts.size()];
    const auto label = kAllValences[rng() % 3];
    const std::string user = fmt::format("user-{}", rng() % 4);
    feed::set_override(st, &st, user, post, label, std::nullopt, kInstall + Seconds{100 + i});
  }
  const auto bystander = feed::annotate(model, posts, st.overrides_for("bystander"));
  for (const auto& a : bystander) {
    c.require(!a.override_label && a.effective() == a.machine, fmt::format("override leaked on {}", a.post.id));
  }
  for (int u = 0; u < 4; ++u) {
    const auto mine = st.overrides_for(fmt::format("user-{}", u));
    for (const auto& [post_id, label] : mine) {
      const auto rec = st.find_override(fmt::format("user-{}", u), post_id);
      c.require(rec && rec->label == label, "override lookup disagrees with per-user map");
    }
  }

  const auto res = live.client.Post(
      "/override", json{{"user", "p00001"}, {"post_id", "f-00"}, {"label", "negative"}, {"at", "2019-03-16T00:00:00Z"}}.dump(),
      "application/json");
  c.require(res && res->status == 200, "HTTP override failed");
  auto effective_of = [&](const std::string& user) -> json {
    const auto feed = live.client.Get("/feed?user=" + user + "&mode=original&at=2019-03-16T00:00:01Z");
    if (!feed || feed->status != 200) return json("request failed");
    const auto body = json::parse(feed->body);
    for (const auto& item : body["items"]) {
      if (item["post_id"] == "f-00") return json::array({item["override"], item["effective"], item["machine"]});
    }
    return json("missing");
  };
  const auto alice = effective_of("p00001");
  const auto bob = effective_of("p00002");
  c.require(alice.is_array() && alice[0] == "negative" && alice[1] == "negative", "relabel not visible to its author");
  c.require(bob.is_array() && bob[0].is_null() && bob[1] == bob[2], "relabel visible to another participant");
}

void protocol_invariants() {
  const auto start = Clock::now();
  LiveService live;
  Checks a, b, cc, d;
  stats_refused_for_t2(a, live);
  no_protected_valence(b, live);
  reminder_rule(cc);
  override_locality(d, live);
  Checks all;
  for (auto* part : {&a, &b, &cc, &d}) {
    all.failures.insert(all.failures.end(), part->failures.begin(), part->failures.end());
  }
  record("protocol invariants", all.ok(),
         fmt::format("T2 stats refused {}, no protected valence {}, reminder rule {}, override locality {}, {:.1f} s{}",
                     a.ok() ? "ok" : "FAIL", b.ok() ? "ok" : "FAIL", cc.ok() ? "ok" : "FAIL",
                     d.ok() ? "ok" : "FAIL", seconds_since(start), first_failures(all)));
}

// ---------------------------------------------------------------- PHQ-8

void phq8_exhaustive() {
  Checks c;
  std::size_t combos = 0;
  std::size_t flagged = 0;
  std::array<int, 8> items{};
  for (int code = 0; code < (1 << 16); ++code) {
    int total = 0;
    for (int k = 0; k < 8; ++k) {
      items[static_cast<std::size_t>(k)] = (code >> (2 * k)) & 3;
      total += items[static_cast<std::size_t>(k)];
    }
    const auto s = analysis::phq8_score(items);
    ++combos;
    if (s.flagged) ++flagged;
    if (s.total != total || s.flagged != (total >= 10)) {
      c.require(false, fmt::format("combination {:04x}: total {} flagged {}", code, s.total, s.flagged));
    }
  }
  // Independent count of 8 items in 0..3 summing to at least 10.
  std::array<std::size_t, 25> ways{};
  ways[0] = 1;
  for (int k = 0; k < 8; ++k) {
    std::array<std::size_t, 25> next{};
    for (int s = 0; s <= 24; ++s) {
      for (int v = 0; v <= 3 && s + v <= 24; ++v) next[static_cast<std::size_t>(s + v)] += ways[static_cast<std::size_t>(s)];
    }
    ways = next;
  }
  std::size_t expected_flagged = 0;
  for (int s = 10; s <= 24; ++s) expected_flagged += ways[static_cast<std::size_t>(s)];
  c.require(flagged == expected_flagged, fmt::format("{} flagged, expected {}", flagged, expected_flagged));
  c.require(!analysis::phq8_score(std::array<int, 8>{3, 3, 3, 0, 0, 0, 0, 0}).flagged, "total 9 flagged");
  c.require(analysis::phq8_score(std::array<int, 8>{3, 3, 3, 1, 0, 0, 0, 0}).flagged, "total 10 not flagged");
  c.expect_code(Errc::OutOfRangeItem, "item 4", [] { analysis::phq8_score(std::array<int, 8>{4, 0, 0, 0, 0, 0, 0, 0}); });
  c.expect_code(Errc::OutOfRangeItem, "item -1", [] { analysis::phq8_score(std::array<int, 8>{0, 0, 0, 0, 0, 0, 0, -1}); });
  c.expect_code(Errc::OutOfRangeItem, "seven items", [] { analysis::phq8_score(std::array<int, 7>{}); });
  record("PHQ-8", c.ok(),
         fmt::format("{} combinations scored, {} flagged (closed form {}), boundary at 10{}", combos, flagged,
                     expected_flagged, first_failures(c)));
}

// ---------------------------------------------------------------- ingestion

std::map<std::string, std::vector<std::vector<Post>>> random_timelines(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const char* words[] = {"love", "great", "happy", "hate", "awful", "sad", "noon", "meeting", "coffee"};
  std::map<std::string, std::vector<std::vector<Post>>> out;
  for (int u = 0; u < 5; ++u) {
    const auto user = fmt::format("user{}", u);
    std::vector<Post> posts;
    const int n = 100 + static_cast<int>(rng() % 150);
    for (int i = 0; i < n; ++i) {
      std::string text;
      for (int w = 0; w < 4; ++w) text += std::string(words[rng() % 9]) + " ";
      auto p = make_post(fmt::format("{}-{:04}", user, i), user, text, kInstall + Seconds{60 * i}, rng() % 7 == 0);
      if (rng() % 10 == 0) p.quoted_text = "great point";
      posts.push_back(std::move(p));
    }
    std::vector<std::vector<Post>> pages;
    for (std::size_t i = 0; i < posts.size();) {
      const std::size_t len = std::min<std::size_t>(1 + rng() % 40, posts.size() - i);
      pages.emplace_back(posts.begin() + static_cast<std::ptrdiff_t>(i),
                         posts.begin() + static_cast<std::ptrdiff_t>(i + len));
      i += len;
    }
    out[user] = std::move(pages);
  }
  return out;
}

void ingestion_idempotence() {
  Checks c;
  const auto model = tiny_model();
  const auto from = kInstall;
  const auto to = kInstall + days(7);
  std::size_t scenarios = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto timelines = random_timelines(seed);
    store::ScriptedFeedSource src;
    for (const auto& [user, pages] : timelines) src.set_timeline(user, pages);

    store::Store once;
    std::size_t first = 0;
    for (const auto& [user, pages] : timelines) first += store::ingest_timeline(src, once, user, from, to, &model);
    const auto fp1 = once.fingerprint();
    std::size_t second = 0;
    for (const auto& [user, pages] : timelines) second += store::ingest_timeline(src, once, user, from, to, &model);
    c.require(second == 0, fmt::format("seed {}: second pass stored {} new posts", seed, second));
    c.require(once.fingerprint() == fp1, fmt::format("seed {}: fingerprint changed on re-ingest", seed));

    // Reverse user order, interrupted by faults and resumed.
    store::Store other;
    store::ScriptedFeedSource flaky;
    for (const auto& [user, pages] : timelines) flaky.set_timeline(user, pages);
    for (auto it = timelines.rbegin(); it != timelines.rend(); ++it) {
      flaky.inject_fault(store::ScriptedFeedSource::Fault::Unavailable);
      for (int attempt = 0; attempt < 10; ++attempt) {
        try {
          store::ingest_timeline(flaky, other, it->first, from, to, &model);
          break;
        } catch (const Error&) {
        }
      }
    }
    c.require(other.fingerprint() == fp1, fmt::format("seed {}: resumed ingest differs", seed));

    TempDir dir;
    {
      store::Store persisted(dir.path() / "store");
      for (const auto& [user, pages] : timelines) store::ingest_timeline(src, persisted, user, from, to, &model);
      persisted.flush();
    }
    store::Store reloaded(dir.path() / "store");
    for (const auto& [user, pages] : timelines) store::ingest_timeline(src, reloaded, user, from, to, &model);
    c.require(reloaded.fingerprint() == fp1, fmt::format("seed {}: reload plus re-ingest differs", seed));
    c.require(first > 0, "nothing ingested");
    ++scenarios;
  }
  record("ingestion idempotence", c.ok(),
         fmt::format("{} random timeline sets: repeat, resumed and reloaded ingests hash identically{}", scenarios,
                     first_failures(c)));
}

}  // namespace

int main() {
  criterion("classifier", classifier_accuracy);
  criterion("share round trip", table_round_trip);
  criterion("t-test oracle", ttest_oracle);
  criterion("power", power);
  criterion("protocol invariants", protocol_invariants);
  criterion("PHQ-8", phq8_exhaustive);
  criterion("ingestion idempotence", ingestion_idempotence);

  const auto failed = std::count_if(g_verdicts.begin(), g_verdicts.end(), [](const Verdict& v) { return !v.pass; });
  std::printf("%zu/%zu criteria passed\n", g_verdicts.size() - static_cast<std::size_t>(failed), g_verdicts.size());
  return failed == 0 ? 0 : 1;
}
