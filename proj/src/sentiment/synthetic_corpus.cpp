#include "moodifier/sentiment/synthetic_corpus.hpp"

#include <array>
#include <string_view>

namespace moodifier::sentiment {

namespace {

constexpr std::array<std::string_view, 40> kPositiveWords{
    "love",    "great",    "happy",   "awesome",  "amazing", "wonderful", "best",
    "excited", "thanks",   "fun",     "beautiful", "good",   "glad",      "enjoy",
    "lovely",  "perfect",  "win",     "proud",    "smile",   "sweet",     "cool",
    "nice",    "fantastic", "yay",    "congrats", "brilliant", "laugh",   "hope",
    "blessed", "grateful", "delight", "cheers",   "favorite", "joy",      "incredible",
    "celebrate", "sunshine", "hug",   "exciting", "kind"};

constexpr std::array<std::string_view, 40> kNegativeWords{
    "hate",    "sad",     "awful",    "terrible", "worst",   "angry",   "tired",
    "sick",    "miss",    "bad",      "hurt",     "cry",     "sorry",   "lonely",
    "broken",  "annoying", "fail",    "ugly",     "pain",    "upset",   "boring",
    "stupid",  "horrible", "depressed", "scared", "lost",    "sucks",   "ugh",
    "disappointed", "stress", "worried", "afraid", "tragic", "grief",   "mad",
    "furious", "gross",   "cold",     "ruined",   "lame"};

constexpr std::array<std::string_view, 60> kFillerWords{
    "the",    "a",       "to",     "and",    "of",      "in",      "is",     "it",
    "for",    "on",      "this",   "that",   "with",    "at",      "my",     "we",
    "today",  "just",    "news",   "game",   "week",    "time",    "people", "city",
    "new",    "update",  "report", "meeting", "train",  "coffee",  "school", "work",
    "morning", "tonight", "phone", "team",   "data",    "policy",  "market", "weather",
    "article", "video",  "live",   "read",   "watch",   "going",   "still",  "about",
    "from",   "what",    "how",    "when",   "there",   "their",   "would",  "could",
    "next",   "year",    "show",   "story"};

constexpr std::array<std::string_view, 6> kHandles{"@alex", "@sam_k", "@newsdesk", "@jo",
                                                   "@mitmedia", "@friend42"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, N - 1);
  return words[d(rng)];
}

std::string elongate(std::string_view word, std::mt19937_64& rng) {
  std::string out(word);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const char c = out[i];
    if (c == 'o' || c == 'a' || c == 'e') {
      std::uniform_int_distribution<int> extra(1, 3);
      out.insert(i, static_cast<std::size_t>(extra(rng)), c);
      break;
    }
  }
  return out;
}

std::vector<std::string_view> ascii_entries(const std::set<std::string, std::less<>>& entries) {
  std::vector<std::string_view> out;
  for (const auto& e : entries) {
    if (e.size() <= 3 && static_cast<unsigned char>(e[0]) < 0x80) out.push_back(e);
  }
  if (out.empty()) out.push_back(*entries.begin());
  return out;
}

}  // namespace

SyntheticTextGenerator::SyntheticTextGenerator(std::uint64_t seed, SyntheticTextOptions options)
    : rng_(seed), options_(options) {}

std::string SyntheticTextGenerator::text(Valence valence) {
  std::uniform_int_distribution<std::size_t> len(options_.min_words, options_.max_words);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = len(rng_);

  std::string out;
  auto append = [&out](std::string_view w) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  };

  if (u(rng_) < options_.mention_rate) append(pick(kHandles, rng_));
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u(rng_);
    std::string_view word;
    if (valence == Valence::Positive && r < options_.polar_word_rate) {
      word = pick(kPositiveWords, rng_);
    } else if (valence == Valence::Negative && r < options_.polar_word_rate) {
      word = pick(kNegativeWords, rng_);
    } else if (valence != Valence::Neutral &&
               r < options_.polar_word_rate + options_.cross_word_rate) {
      word = valence == Valence::Positive ? pick(kNegativeWords, rng_) : pick(kPositiveWords, rng_);
    } else if (valence != Valence::Neutral &&
               r < options_.polar_word_rate + options_.cross_word_rate + options_.negation_rate) {
      append("not");
      word = valence == Valence::Positive ? pick(kNegativeWords, rng_) : pick(kPositiveWords, rng_);
    } else {
      word = pick(kFillerWords, rng_);
    }
    if (u(rng_) < 0.04) {
      append(elongate(word, rng_));
    } else if (u(rng_) < 0.05) {
      std::string upper(word);
      for (auto& c : upper) c = static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
      append(upper);
    } else {
      append(word);
    }
  }
  if (u(rng_) < options_.url_rate) append("https://t.co/x7Yz");
  return out;
}

std::string SyntheticTextGenerator::emoticon_text(Valence valence, const EmoticonLexicon& lexicon) {
  auto body = text(valence);
  if (valence == Valence::Neutral) return body;
  const auto entries =
      ascii_entries(valence == Valence::Positive ? lexicon.positive() : lexicon.negative());
  std::uniform_int_distribution<std::size_t> d(0, entries.size() - 1);
  body.push_back(' ');
  body.append(entries[d(rng_)]);
  return body;
}

std::vector<std::string> synthesize_emoticon_corpus(const SyntheticCorpusOptions& options,
                                                    const EmoticonLexicon& lexicon) {
  SyntheticTextGenerator gen(options.seed, options.text);
  auto& rng = gen.rng();
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<std::string> out;
  out.reserve(options.size);
  for (std::size_t i = 0; i < options.size; ++i) {
    const double kind = u(rng);
    const Valence body = u(rng) < 0.5 ? Valence::Positive : Valence::Negative;
    if (kind < options.unlabeled_fraction) {
      out.push_back(gen.text(body));
    } else if (kind < options.unlabeled_fraction + options.conflicting_fraction) {
      auto text = gen.emoticon_text(body, lexicon);
      text += body == Valence::Positive ? " :(" : " :)";
      out.push_back(std::move(text));
    } else {
      Valence emoticon = body;
      if (u(rng) < options.label_noise) {
        emoticon = body == Valence::Positive ? Valence::Negative : Valence::Positive;
      }
      auto text = gen.text(body);
      const auto entries =
          ascii_entries(emoticon == Valence::Positive ? lexicon.positive() : lexicon.negative());
      std::uniform_int_distribution<std::size_t> d(0, entries.size() - 1);
      text.push_back(' ');
      text.append(entries[d(rng)]);
      out.push_back(std::move(text));
    }
  }
  return out;
}

}  // namespace moodifier::sentiment
