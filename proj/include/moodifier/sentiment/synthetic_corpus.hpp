#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "moodifier/common/valence.hpp"
#include "moodifier/sentiment/lexicon.hpp"

namespace moodifier::sentiment {

// Tweet-like text generator for fixtures and desk-scale training runs.
// Texts mix polarity words, filler words, mentions, links and elongated
// words; the mix is controlled by the options below.
struct SyntheticTextOptions {
  double polar_word_rate = 0.25;  // share of words drawn from the text's own polarity list
  double cross_word_rate = 0.03;  // share drawn from the opposite list
  double negation_rate = 0.03;    // chance of a "not <opposite word>" phrase
  double mention_rate = 0.15;
  double url_rate = 0.10;
  std::size_t min_words = 5;
  std::size_t max_words = 16;
};

class SyntheticTextGenerator {
 public:
  explicit SyntheticTextGenerator(std::uint64_t seed, SyntheticTextOptions options = {});

  // Body text without any emoticon.
  std::string text(Valence valence);

  // Body text followed by one emoticon of the given polarity drawn from
  // the lexicon's ASCII entries. Neutral yields no emoticon.
  std::string emoticon_text(Valence valence, const EmoticonLexicon& lexicon);

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  SyntheticTextOptions options_;
};

struct SyntheticCorpusOptions {
  std::size_t size = 10000;
  // Probability that the emoticon contradicts the body text, modelling the
  // noise inherent in emoticon labels.
  double label_noise = 0.10;
  // Shares of texts carrying no emoticon or both polarities; these are
  // excluded by distant supervision.
  double unlabeled_fraction = 0.03;
  double conflicting_fraction = 0.02;
  std::uint64_t seed = 1;
  SyntheticTextOptions text{};
};

std::vector<std::string> synthesize_emoticon_corpus(const SyntheticCorpusOptions& options,
                                                    const EmoticonLexicon& lexicon);

}  // namespace moodifier::sentiment
