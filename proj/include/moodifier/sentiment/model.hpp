#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moodifier/common/post.hpp"
#include "moodifier/common/time.hpp"
#include "moodifier/common/valence.hpp"
#include "moodifier/sentiment/lexicon.hpp"
#include "moodifier/sentiment/normalize.hpp"

namespace moodifier::sentiment {

// Binary polarity used for training; Neutral only exists at inference time.
enum class Polarity { Positive = 0, Negative = 1 };

struct TrainingInstance {
  TokenSequence tokens;
  Polarity label;

  bool operator==(const TrainingInstance&) const = default;
};

// Distant supervision: a post with at least one positive and no negative
// emoticon becomes a Positive instance (and symmetrically for Negative).
// Posts with both, neither, or no tokens left after normalization are
// skipped. Throws Error(EmptyCorpus) if nothing survives.
std::vector<TrainingInstance> build_distant_corpus(std::span<const Post> posts,
                                                   const EmoticonLexicon& lexicon);
std::vector<TrainingInstance> build_distant_corpus(std::span<const std::string> texts,
                                                   const EmoticonLexicon& lexicon);

inline constexpr double kDefaultTau = 1.0;

struct ModelMeta {
  std::string corpus_fingerprint;  // 16 hex digits, FNV-1a over the instances
  std::size_t instance_count = 0;
  Timestamp created_at{};

  bool operator==(const ModelMeta&) const = default;
};

struct Classification {
  Valence label = Valence::Neutral;
  double log_odds = 0.0;    // log P(pos | tokens) - log P(neg | tokens)
  double confidence = 0.5;  // logistic(|log_odds|)
};

// Multinomial naive Bayes over unigrams with add-one smoothing, plus a
// symmetric neutral band of half-width tau in log-odds units.
//
// Immutable once built; safe to share across threads.
class SentimentModel {
 public:
  // Per-token log P(token | class), indexed by Polarity.
  using LogLikelihood = std::array<double, 2>;

  SentimentModel(std::array<double, 2> log_prior, std::map<std::string, LogLikelihood> likelihood,
                 double tau, ModelMeta meta);

  SentimentModel(const SentimentModel& other);
  SentimentModel& operator=(const SentimentModel& other);
  SentimentModel(SentimentModel&&) noexcept = default;
  SentimentModel& operator=(SentimentModel&&) noexcept = default;

  // Throws Error(SingleClassCorpus) when a label is absent and
  // Error(InvalidTau) when tau < 0 or not finite. Deterministic in
  // (instances, tau); meta.created_at is left at the epoch.
  static SentimentModel train(std::span<const TrainingInstance> instances, double tau = kDefaultTau);

  // Tokens are normalized with `lexicon`; tokens outside the vocabulary are
  // skipped and a text with no known tokens is Neutral with log_odds 0.
  Classification classify(std::string_view text,
                          const EmoticonLexicon& lexicon = EmoticonLexicon::builtin()) const;
  Classification classify_tokens(std::span<const std::string> tokens) const;

  // Same model with a different neutral band.
  SentimentModel with_tau(double tau) const;
  SentimentModel with_created_at(Timestamp t) const;

  double tau() const { return tau_; }
  double log_prior(Polarity p) const { return log_prior_[static_cast<std::size_t>(p)]; }
  const std::array<double, 2>& log_priors() const { return log_prior_; }
  const std::map<std::string, LogLikelihood>& likelihoods() const { return likelihood_; }
  std::size_t vocabulary_size() const { return likelihood_.size(); }
  const ModelMeta& meta() const { return meta_; }

  // Stable identifier of the trained parameters (hex), independent of tau.
  std::string fingerprint() const;

  bool operator==(const SentimentModel& other) const;

 private:
  std::array<double, 2> log_prior_;
  std::map<std::string, LogLikelihood> likelihood_;
  std::unordered_map<std::string_view, const LogLikelihood*> index_;
  double tau_;
  ModelMeta meta_;

  void build_index();
};

// Label from the band rule alone.
Valence band_label(double log_odds, double tau);

}  // namespace moodifier::sentiment
