#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/sentiment/model_io.hpp"
#include "moodifier/sentiment/normalize.hpp"
#include "moodifier/sentiment/synthetic_corpus.hpp"

using namespace moodifier;
using namespace moodifier::sentiment;
using moodifier::testing::TempDir;
using moodifier::testing::tiny_model;

namespace {

const EmoticonLexicon& lex() { return EmoticonLexicon::builtin(); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

// Random corpus over a small alphabet; both classes always present.
std::vector<TrainingInstance> random_corpus(std::mt19937_64& rng, std::size_t docs, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::vector<TrainingInstance> out;
  for (std::size_t i = 0; i < docs; ++i) {
    TrainingInstance inst;
    inst.label = (i % 2 == 0 || rng() % 3 == 0) ? Polarity::Positive : Polarity::Negative;
    if (i == 1) inst.label = Polarity::Negative;
    const auto n = len(rng);
    for (std::size_t k = 0; k < n; ++k) inst.tokens.push_back("w" + std::to_string(word(rng)));
    out.push_back(std::move(inst));
  }
  return out;
}

// Posterior log-odds computed directly from raw counts: P(c) * prod P(w|c)
// with add-one smoothing, normalized in long double.
double brute_force_log_odds(const std::vector<TrainingInstance>& corpus, const std::vector<std::string>& doc) {
  std::map<std::string, std::array<long double, 2>> counts;
  std::array<long double, 2> class_docs{0, 0};
  std::array<long double, 2> class_tokens{0, 0};
  for (const auto& inst : corpus) {
    const int c = inst.label == Polarity::Positive ? 0 : 1;
    class_docs[c] += 1;
    for (const auto& w : inst.tokens) {
      counts[w][c] += 1;
      class_tokens[c] += 1;
    }
  }
  const long double v = static_cast<long double>(counts.size());
  std::array<long double, 2> joint{};
  bool any_known = false;
  for (int c = 0; c < 2; ++c) {
    long double p = class_docs[c] / (class_docs[0] + class_docs[1]);
    for (const auto& w : doc) {
      const auto it = counts.find(w);
      if (it == counts.end()) continue;
      any_known = true;
      p *= (it->second[c] + 1) / (class_tokens[c] + v);
    }
    joint[c] = p;
  }
  if (!any_known) return 0.0;
  const long double posterior = joint[0] / (joint[0] + joint[1]);
  return static_cast<double>(std::log(posterior) - std::log1p(-posterior));
}

}  // namespace

TEST_CASE("normalization maps mentions, urls, case and elongation") {
  const auto t = normalize("@Alice LOVED it sooooo much!!! https://t.co/abc #Yay", lex());
  const std::vector<std::string> expected{"USER", "loved", "it", "soo", "much", "URL", "yay"};
  CHECK(t == expected);
  CHECK(normalize("...", lex()).empty());
  CHECK(normalize("(hello),", lex()) == std::vector<std::string>{"hello"});
}

TEST_CASE("emoticons are counted and stripped") {
  const auto s = scan("great day :) :D but :( ", lex());
  CHECK(s.positive_emoticons == 2);
  CHECK(s.negative_emoticons == 1);
  CHECK(s.tokens == std::vector<std::string>{"great", "day", "but"});
}

TEST_CASE("distant corpus keeps only unambiguous emoticon labels") {
  const std::vector<std::string> texts{"happy :)", "sad :(", "mixed :) :(", "plain text", ":)"};
  const auto corpus = build_distant_corpus(texts, lex());
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].label == Polarity::Positive);
  CHECK(corpus[0].tokens == std::vector<std::string>{"happy"});
  CHECK(corpus[1].label == Polarity::Negative);
  const std::vector<std::string> none{"no labels here", "none here either"};
  CHECK(code_of([&] { build_distant_corpus(none, lex()); }) == Errc::EmptyCorpus);
}

TEST_CASE("training rejects single-class corpora and invalid tau") {
  const std::vector<TrainingInstance> pos{{{"a"}, Polarity::Positive}};
  CHECK(code_of([&] { SentimentModel::train(pos); }) == Errc::SingleClassCorpus);
  const std::vector<TrainingInstance> both{{{"a"}, Polarity::Positive}, {{"b"}, Polarity::Negative}};
  CHECK(code_of([&] { SentimentModel::train(both, -0.1); }) == Errc::InvalidTau);
  CHECK(code_of([&] { SentimentModel::train(both, std::nan("")); }) == Errc::InvalidTau);
  CHECK(code_of([&] { SentimentModel::train(both).with_tau(-1); }) == Errc::InvalidTau);
}

TEST_CASE("posterior matches a brute-force computation on tiny corpora") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto corpus = random_corpus(rng, 3 + rng() % 10, 2 + rng() % 6);
    const auto model = SentimentModel::train(corpus, 0.0);
    for (int q = 0; q < 5; ++q) {
      std::vector<std::string> doc;
      const auto n = 1 + rng() % 7;
      for (std::size_t k = 0; k < n; ++k) doc.push_back("w" + std::to_string(rng() % 9));
      const double expected = brute_force_log_odds(corpus, doc);
      CHECK(std::abs(model.classify_tokens(doc).log_odds - expected) <= 1e-9);
    }
  }
}

TEST_CASE("classification is invariant under token permutation") {
  const auto model = tiny_model();
  std::mt19937_64 rng(5);
  std::vector<std::string> doc{"love", "sad", "news", "happy", "day", "hate", "love", "unknown"};
  const auto base = model.classify_tokens(doc);
  for (int i = 0; i < 100; ++i) {
    std::shuffle(doc.begin(), doc.end(), rng);
    const auto c = model.classify_tokens(doc);
    CHECK(c.log_odds == base.log_odds);
    CHECK(c.label == base.label);
  }
}

TEST_CASE("emoticons do not influence classification") {
  const auto model = tiny_model();
  for (const char* text : {"love this day", "awful sad news", "the meeting"}) {
    const auto base = model.classify(text);
    for (const char* emo : {":)", ":(", "<3", ":D", ":'("}) {
      const auto with = model.classify(std::string(text) + " " + emo);
      CHECK(with.log_odds == base.log_odds);
      CHECK(with.label == base.label);
    }
  }
}

TEST_CASE("labels follow the neutral band") {
  CHECK(band_label(1.0, 1.0) == Valence::Neutral);
  CHECK(band_label(-1.0, 1.0) == Valence::Neutral);
  CHECK(band_label(1.0000001, 1.0) == Valence::Positive);
  CHECK(band_label(-1.0000001, 1.0) == Valence::Negative);
  CHECK(band_label(0.0, 0.0) == Valence::Neutral);

  const auto model = tiny_model(0.7);
  for (const char* text : {"love", "hate", "love hate", "happy sad day", "great great", "zzz"}) {
    const auto c = model.classify(text);
    CHECK(c.label == band_label(c.log_odds, 0.7));
    CHECK(c.confidence == doctest::Approx(1.0 / (1.0 + std::exp(-std::abs(c.log_odds)))));
  }
  const auto unknown = model.classify("nothing known here");
  CHECK(unknown.label == Valence::Neutral);
  CHECK(unknown.log_odds == 0.0);
}

TEST_CASE("raising tau only moves labels toward neutral") {
  const auto model = tiny_model(0.0);
  const std::vector<std::string> texts{"love", "hate", "love hate", "happy sad day", "great great fun",
                                       "awful win", "tired glad", "news"};
  std::vector<Valence> previous;
  for (const auto& t : texts) previous.push_back(model.classify(t).label);
  for (double tau = 0.25; tau <= 6.0; tau += 0.25) {
    const auto m = model.with_tau(tau);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto label = m.classify(texts[i]).label;
      CHECK((label == previous[i] || label == Valence::Neutral));
      previous[i] = label;
    }
  }
}

TEST_CASE("model files round-trip exactly") {
  const auto model = tiny_model(1.25).with_created_at(moodifier::testing::ts("2019-03-01T00:00:00Z"));
  const auto restored = deserialize_model(serialize_model(model));
  CHECK(restored == model);
  CHECK(restored.fingerprint() == model.fingerprint());
  CHECK(restored.tau() == 1.25);

  TempDir dir;
  save_model(model, dir / "m.json");
  CHECK(load_model(dir / "m.json") == model);
  CHECK(code_of([&] { load_model(dir / "missing.json"); }) == Errc::Io);
  CHECK(code_of([] { deserialize_model("{}"); }) == Errc::ModelFormat);
  CHECK(code_of([] { deserialize_model("not json"); }) == Errc::ModelFormat);
  CHECK(code_of([] { deserialize_model(R"({"format":"moodifier-sentiment-model","version":99})"); }) ==
        Errc::ModelFormat);
}

TEST_CASE("fingerprint tracks trained parameters, not tau") {
  const auto model = tiny_model(1.0);
  const SentimentModel copy = model;
  CHECK(copy.fingerprint() == model.fingerprint());
  CHECK(model.with_tau(2.0).fingerprint() == model.fingerprint());
  const std::vector<std::string> other{"sunny :)", "rainy :("};
  const auto retrained = SentimentModel::train(build_distant_corpus(other, EmoticonLexicon::builtin()));
  CHECK(retrained.fingerprint() != model.fingerprint());
}

TEST_CASE("lexicon parsing") {
  std::istringstream ok("# comment\n+\n:)\n<3\n-\n:(\n");
  const auto l = EmoticonLexicon::parse(ok);
  CHECK(l.polarity(":)") == Valence::Positive);
  CHECK(l.polarity(":(") == Valence::Negative);
  CHECK_FALSE(l.polarity(":|").has_value());

  std::istringstream both("+\n:)\n-\n:)\n");
  CHECK(code_of([&] { EmoticonLexicon::parse(both); }) == Errc::InvalidLexicon);
  std::istringstream headless(":)\n");
  CHECK(code_of([&] { EmoticonLexicon::parse(headless); }) == Errc::InvalidLexicon);
  std::istringstream one_sided("+\n:)\n");
  CHECK(code_of([&] { EmoticonLexicon::parse(one_sided); }) == Errc::InvalidLexicon);
  CHECK(lex().polarity(":)") == Valence::Positive);
  CHECK(lex().polarity(":(") == Valence::Negative);
}

TEST_CASE("synthetic corpus is deterministic in its seed") {
  SyntheticCorpusOptions opts;
  opts.size = 300;
  opts.seed = 9;
  const auto a = synthesize_emoticon_corpus(opts, lex());
  const auto b = synthesize_emoticon_corpus(opts, lex());
  CHECK(a == b);
  CHECK(a.size() == 300);
  opts.seed = 10;
  CHECK(synthesize_emoticon_corpus(opts, lex()) != a);
}
