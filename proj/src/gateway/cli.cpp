#include "moodifier/gateway/cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <cmath>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <pthread.h>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "moodifier/analysis/report.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/common/hash.hpp"
#include "moodifier/experiment/participant.hpp"
#include "moodifier/experiment/synthetic_study.hpp"
#include "moodifier/gateway/config.hpp"
#include "moodifier/gateway/service.hpp"
#include "moodifier/sentiment/model_io.hpp"
#include "moodifier/sentiment/synthetic_corpus.hpp"
#include "moodifier/store/ingest.hpp"

namespace moodifier::gateway {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

// Held-out accuracy on the binary task with the band collapsed (tau = 0).
double holdout_accuracy(const sentiment::SentimentModel& model,
                        std::span<const sentiment::TrainingInstance> test) {
  if (test.empty()) return 0.0;
  const auto binary = model.with_tau(0.0);
  std::size_t correct = 0;
  for (const auto& inst : test) {
    const auto label = binary.classify_tokens(inst.tokens).label;
    const auto expected = inst.label == sentiment::Polarity::Positive ? Valence::Positive : Valence::Negative;
    if (label == expected) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

struct TrainArgs {
  std::string corpus;
  std::size_t synthetic = 10000;
  std::uint64_t seed = 1;
  double tau = sentiment::kDefaultTau;
  double holdout = 0.1;
  std::string out;
};

int cmd_train(const TrainArgs& a, bool as_json, std::ostream& out) {
  if (a.holdout < 0.0 || a.holdout >= 1.0) throw UsageError("--holdout must lie in [0, 1)");
  std::vector<std::string> texts;
  if (!a.corpus.empty()) {
    std::ifstream in(a.corpus);
    if (!in) throw Error(Errc::Io, fmt::format("cannot read corpus '{}'", a.corpus));
    texts = read_lines(in);
  } else {
    sentiment::SyntheticCorpusOptions opts;
    opts.size = a.synthetic;
    opts.seed = a.seed;
    texts = sentiment::synthesize_emoticon_corpus(opts, sentiment::EmoticonLexicon::builtin());
  }
  auto instances = sentiment::build_distant_corpus(texts, sentiment::EmoticonLexicon::builtin());
  std::mt19937_64 rng(a.seed);
  std::shuffle(instances.begin(), instances.end(), rng);
  const auto n_test = static_cast<std::size_t>(a.holdout * static_cast<double>(instances.size()));
  const std::span<const sentiment::TrainingInstance> all(instances);
  const auto train = all.subspan(0, instances.size() - n_test);
  const auto test = all.subspan(instances.size() - n_test);
  const auto model = sentiment::SentimentModel::train(train, a.tau);
  sentiment::save_model(model, a.out);
  const double acc = holdout_accuracy(model, test);
  if (as_json) {
    out << json{{"model", a.out},
                {"texts", texts.size()},
                {"train_instances", train.size()},
                {"holdout_instances", test.size()},
                {"vocabulary", model.vocabulary_size()},
                {"fingerprint", model.fingerprint()},
                {"tau", model.tau()},
                {"holdout_accuracy", test.empty() ? json(nullptr) : json(acc)}}
               .dump()
        << '\n';
  } else {
    fmt::print(out, "trained on {} of {} labeled texts ({} read), vocabulary {}\n", train.size(),
               instances.size(), texts.size(), model.vocabulary_size());
    fmt::print(out, "fingerprint {}  tau {}\n", model.fingerprint(), model.tau());
    if (!test.empty()) fmt::print(out, "held-out accuracy (tau = 0): {:.4f} on {} texts\n", acc, test.size());
    fmt::print(out, "model written to {}\n", a.out);
  }
  return 0;
}

struct ClassifyArgs {
  std::string model;
  std::vector<std::string> texts;
  std::optional<double> tau;
};

int cmd_classify(const ClassifyArgs& a, bool as_json, std::istream& in, std::ostream& out) {
  auto model = sentiment::load_model(a.model);
  if (a.tau) {
    if (!std::isfinite(*a.tau) || *a.tau < 0.0) throw UsageError("--tau must be >= 0");
    model = model.with_tau(*a.tau);
  }
  const auto texts = a.texts.empty() ? read_lines(in) : a.texts;
  json results = json::array();
  for (const auto& t : texts) {
    const auto c = model.classify(t);
    if (as_json) {
      results.push_back({{"text", t}, {"label", to_string(c.label)}, {"log_odds", c.log_odds},
                         {"confidence", c.confidence}});
    } else {
      fmt::print(out, "{}\t{:.6f}\n", to_string(c.label), c.log_odds);
    }
  }
  if (as_json) out << (texts.size() == 1 ? results[0] : results).dump() << '\n';
  return 0;
}

struct IngestArgs {
  std::string source;
  std::string store;
  std::vector<std::string> users;
  std::string from;
  std::string to;
  std::string model;
  int max_attempts = 6;
  std::size_t page_size = 50;
};

int cmd_ingest(const IngestArgs& a, bool as_json, std::ostream& out, std::ostream& err) {
  const auto from = parse_timestamp(a.from);
  const auto to = parse_timestamp(a.to);
  std::optional<sentiment::SentimentModel> model;
  if (!a.model.empty()) model = sentiment::load_model(a.model);
  store::DirectoryFeedSource source(a.source, a.page_size);
  store::Store st{fs::path(a.store)};
  RetryPolicy policy;
  policy.max_attempts = a.max_attempts;
  json per_user = json::object();
  std::size_t total = 0;
  for (const auto& user : a.users) {
    const auto n = ingest_with_backoff(source, st, user, from, to, model ? &*model : nullptr, policy, &err);
    per_user[user] = n;
    total += n;
    if (!as_json) fmt::print(out, "{}: {} new posts\n", user, n);
  }
  st.flush();
  if (as_json) {
    out << json{{"ingested", total}, {"per_user", per_user}, {"fingerprint", st.fingerprint()}}.dump() << '\n';
  } else {
    fmt::print(out, "total {} new posts; store fingerprint {}\n", total, st.fingerprint());
  }
  return 0;
}

struct EnrollArgs {
  std::string store;
  std::string handle;
  bool is_protected = false;
  std::vector<std::string> friends;
  std::uint64_t seed = 20190301;
  std::string at;
};

int cmd_enroll(const EnrollArgs& a, bool as_json, std::ostream& out) {
  store::Store st{fs::path(a.store)};
  experiment::TreatmentAssigner assigner(a.seed);
  // Replay earlier draws so successive invocations continue one sequence.
  for (std::size_t i = 0; i < st.participant_count(); ++i) assigner.next();
  const auto now = a.at.empty() ? utc_now() : parse_timestamp(a.at);
  auto p = experiment::enroll(st, assigner, a.handle, a.is_protected, now);
  if (!a.friends.empty()) {
    const auto seed = a.seed ^ Fnv1a().update(p.id).value();
    p = experiment::assign_control_cohort(
        st, p.id, experiment::sample_control(a.friends, experiment::kControlCohortCap, seed));
  }
  st.flush();
  if (as_json) {
    auto j = store::to_record(p);
    j.erase("schema_version");
    out << j.dump() << '\n';
  } else {
    fmt::print(out, "{} enrolled as {} in group {} at {}{}\n", p.handle, p.id, to_string(p.group),
               format_timestamp(p.installed_at),
               p.control_cohort ? fmt::format(" with {} control friends", p.control_cohort->size()) : "");
  }
  return 0;
}

struct SimulateArgs {
  std::uint64_t seed = 7;
  std::string out_dir;
  std::size_t t1 = 24;
  std::size_t t2 = 28;
  std::size_t protected_users = 3;
  std::size_t control = 1000;
  bool spread = false;
  double persistence = 0.9;
  bool no_surveys = false;
  bool no_engagement = false;
};

int cmd_simulate(const SimulateArgs& a, bool as_json, std::ostream& out, std::ostream& err) {
  auto spec = experiment::StudySpec::published_defaults();
  spec.t1_users = a.t1;
  spec.t2_users = a.t2;
  spec.protected_users = a.protected_users;
  spec.control_users = a.control;
  spec.persistence = a.persistence;
  spec.surveys.enabled = !a.no_surveys;
  spec.engagement.enabled = !a.no_engagement;
  if (a.spread) spec.with_published_spread();
  const auto study = experiment::generate_synthetic_study(spec, a.seed);

  if (a.out_dir.empty()) {
    store::Store st;
    store::load_study(st, study);
    st.write_bundle(out);
    return 0;
  }
  store::Store st{fs::path(a.out_dir)};
  store::load_study(st, study);
  st.flush();
  const json summary{{"store", a.out_dir},
                     {"participants", study.participants.size()},
                     {"posts", study.posts.size()},
                     {"events", study.events.size()},
                     {"surveys", study.surveys.size()},
                     {"fingerprint", st.fingerprint()}};
  if (as_json) {
    out << summary.dump() << '\n';
  } else {
    fmt::print(err, "wrote {} participants, {} posts, {} events, {} surveys to {}\n", study.participants.size(),
               study.posts.size(), study.events.size(), study.surveys.size(), a.out_dir);
  }
  return 0;
}

struct AnalyzeArgs {
  std::string store;
  std::string format = "text";
  std::string variant = "welch";
  bool pooled_shares = false;
  int session_gap_min = 30;
};

int cmd_analyze(const AnalyzeArgs& a, bool as_json, std::istream& in, std::ostream& out) {
  const auto format = analysis::parse_report_format(as_json ? "json" : a.format);
  if (!format) throw UsageError(fmt::format("unknown format '{}'", a.format));
  const auto variant = analysis::parse_variant(a.variant);
  if (!variant || (*variant != analysis::TTestVariant::Welch && *variant != analysis::TTestVariant::Pooled)) {
    throw UsageError("--variant must be welch or pooled");
  }
  if (a.session_gap_min <= 0) throw UsageError("--session-gap-min must be positive");
  std::unique_ptr<store::Store> st;
  if (a.store.empty()) {
    st = std::make_unique<store::Store>();
    st->read_bundle(in);
  } else {
    if (!fs::is_directory(a.store)) throw Error(Errc::Io, fmt::format("no store directory '{}'", a.store));
    st = std::make_unique<store::Store>(fs::path(a.store));
  }
  analysis::ReportOptions options;
  options.two_sample_variant = *variant;
  options.pooled_shares = a.pooled_shares;
  options.session_gap = std::chrono::minutes{a.session_gap_min};
  out << analysis::render(analysis::build_report(st->snapshot(), options), *format);
  return 0;
}

struct ServeArgs {
  std::string bind;
  std::string store;
  std::string model;
  std::optional<double> tau;
  std::string static_dir;
};

int cmd_serve(const ServeArgs& a, bool as_json, std::ostream& out) {
  auto config = config_from_env();
  if (!a.bind.empty()) std::tie(config.host, config.port) = parse_bind(a.bind);
  if (!a.store.empty()) config.store_path = a.store;
  if (!a.model.empty()) config.model_path = a.model;
  if (a.tau) config.tau = a.tau;
  if (!a.static_dir.empty()) config.static_dir = a.static_dir;
  config.validate();

  // Block the shutdown signals before any server thread exists so that only
  // sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(config);
  const int port = service.start();
  if (as_json) {
    out << json{{"listening", fmt::format("{}:{}", config.host, port)},
                {"model_fingerprint", service.model().fingerprint()}}
               .dump()
        << std::endl;
  } else {
    out << fmt::format("listening on {}:{} (model {})", config.host, port, service.model().fingerprint())
        << std::endl;
  }
  int sig = 0;
  sigwait(&signals, &sig);
  service.stop();
  return 0;
}

}  // namespace

std::size_t ingest_with_backoff(store::FeedSource& source, store::Store& store, const std::string& user_id,
                                Timestamp from, Timestamp to, const sentiment::SentimentModel* model,
                                const RetryPolicy& policy, std::ostream* log) {
  auto sleep = policy.sleep ? policy.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  auto backoff = policy.initial_backoff;
  const auto before = store.post_count();
  for (int attempt = 1;; ++attempt) {
    std::chrono::milliseconds wait{0};
    try {
      // Counted against the starting size so posts stored by a failed
      // attempt still count as new.
      store::ingest_timeline(source, store, user_id, from, to, model);
      return store.post_count() - before;
    } catch (const RateLimitedError& e) {
      if (attempt >= policy.max_attempts) throw;
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(e.retry_after());
    } catch (const Error& e) {
      if (e.code() != Errc::SourceUnavailable || attempt >= policy.max_attempts) throw;
      wait = backoff;
      backoff *= 2;
    }
    wait = std::min(wait, policy.max_wait);
    if (log) fmt::print(*log, "{}: attempt {} failed, retrying in {} ms\n", user_id, attempt, wait.count());
    sleep(wait);
  }
}

int run_command(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moodifier: feed sentiment annotation, study simulation and analysis", "moodifier"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable JSON output");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a sentiment model from emoticon-labeled texts");
  train_cmd->add_option("--corpus", train.corpus, "File with one text per line (default: synthetic corpus)");
  train_cmd->add_option("--synthetic", train.synthetic, "Size of the synthetic corpus")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Seed for corpus generation and the train/holdout split");
  train_cmd->add_option("--tau", train.tau, "Neutral band half-width")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--holdout", train.holdout, "Fraction held out for evaluation");
  train_cmd->add_option("--out,-o", train.out, "Model output path")->required();

  ClassifyArgs classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify texts (arguments or stdin lines)");
  classify_cmd->add_option("--model,-m", classify.model, "Model file")->required();
  classify_cmd->add_option("--text,-t", classify.texts, "Text to classify (repeatable)");
  classify_cmd->add_option("--tau", classify.tau, "Override the model's neutral band");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest timelines from a feed directory into a store");
  ingest_cmd->add_option("--source", ingest.source, "Directory with posts.ndjson [and friends.json]")->required();
  ingest_cmd->add_option("--store", ingest.store, "Store directory")->required();
  ingest_cmd->add_option("--user,-u", ingest.users, "User id (repeatable)")->required();
  ingest_cmd->add_option("--from", ingest.from, "Start, inclusive (YYYY-MM-DDTHH:MM:SSZ)")->required();
  ingest_cmd->add_option("--to", ingest.to, "End, exclusive")->required();
  ingest_cmd->add_option("--model,-m", ingest.model, "Classify ingested posts with this model");
  ingest_cmd->add_option("--max-attempts", ingest.max_attempts, "Attempts per user")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--page-size", ingest.page_size, "Source page size")->check(CLI::PositiveNumber);

  EnrollArgs enroll;
  auto* enroll_cmd = app.add_subcommand("enroll", "Enroll a participant");
  enroll_cmd->add_option("--store", enroll.store, "Store directory")->required();
  enroll_cmd->add_option("--handle", enroll.handle, "Platform handle")->required();
  enroll_cmd->add_flag("--protected", enroll.is_protected, "The account is protected");
  enroll_cmd->add_option("--friends", enroll.friends, "Friend ids for the control cohort")->delimiter(',');
  enroll_cmd->add_option("--seed", enroll.seed, "Assignment seed");
  enroll_cmd->add_option("--at", enroll.at, "Install time (default: now)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic study (bundle on stdout or a store)");
  sim_cmd->add_option("--seed", sim.seed, "Generator seed");
  sim_cmd->add_option("--out,-o", sim.out_dir, "Write a store directory instead of a bundle");
  sim_cmd->add_option("--t1", sim.t1, "T1 participants");
  sim_cmd->add_option("--t2", sim.t2, "T2 participants");
  sim_cmd->add_option("--protected", sim.protected_users, "Participants with protected accounts");
  sim_cmd->add_option("--control", sim.control, "Control users");
  sim_cmd->add_flag("--spread", sim.spread, "Use published between-user standard deviations");
  sim_cmd->add_option("--persistence", sim.persistence, "Between-window correlation of user disposition")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_flag("--no-surveys", sim.no_surveys, "Skip surveys");
  sim_cmd->add_flag("--no-engagement", sim.no_engagement, "Skip telemetry");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Render the study report (bundle on stdin or a store)");
  analyze_cmd->add_option("--store", analyze.store, "Store directory (default: read a bundle from stdin)");
  analyze_cmd->add_option("--format,-f", analyze.format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  analyze_cmd->add_option("--variant", analyze.variant, "Two-sample test: welch or pooled")
      ->check(CLI::IsMember({"welch", "pooled"}));
  analyze_cmd->add_flag("--pooled-shares", analyze.pooled_shares, "Pool posts instead of averaging users");
  analyze_cmd->add_option("--session-gap-min", analyze.session_gap_min, "Session split gap in minutes");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service (MOODIFIER_* variables apply)");
  serve_cmd->add_option("--bind", serve.bind, "host:port");
  serve_cmd->add_option("--store", serve.store, "Store directory");
  serve_cmd->add_option("--model,-m", serve.model, "Model file");
  serve_cmd->add_option("--tau", serve.tau, "Override the model's neutral band");
  serve_cmd->add_option("--static", serve.static_dir, "Directory of UI assets to serve");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(train, as_json, out);
    if (*classify_cmd) return cmd_classify(classify, as_json, in, out);
    if (*ingest_cmd) return cmd_ingest(ingest, as_json, out, err);
    if (*enroll_cmd) return cmd_enroll(enroll, as_json, out);
    if (*sim_cmd) return cmd_simulate(sim, as_json, out, err);
    if (*analyze_cmd) return cmd_analyze(analyze, as_json, in, out);
    if (*serve_cmd) return cmd_serve(serve, as_json, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const CorruptRecordError& e) {
    err << "error: corrupt_record at line " << e.line() << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace moodifier::gateway
