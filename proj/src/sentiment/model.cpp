#include "moodifier/sentiment/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"
#include "moodifier/common/hash.hpp"

namespace moodifier::sentiment {

namespace {

void check_tau(double tau) {
  if (!std::isfinite(tau) || tau < 0.0) {
    throw Error(Errc::InvalidTau, fmt::format("tau must be finite and >= 0, got {}", tau));
  }
}

std::string corpus_fingerprint(std::span<const TrainingInstance> instances) {
  Fnv1a h;
  for (const auto& inst : instances) {
    h.update(inst.label == Polarity::Positive ? "+" : "-");
    for (const auto& t : inst.tokens) {
      h.update(t);
      h.update(std::string_view("\x1f", 1));
    }
    h.update(std::string_view("\x1e", 1));
  }
  return h.hex();
}

}  // namespace

Valence band_label(double log_odds, double tau) {
  if (log_odds > tau) return Valence::Positive;
  if (log_odds < -tau) return Valence::Negative;
  return Valence::Neutral;
}

SentimentModel::SentimentModel(std::array<double, 2> log_prior,
                               std::map<std::string, LogLikelihood> likelihood, double tau,
                               ModelMeta meta)
    : log_prior_(log_prior), likelihood_(std::move(likelihood)), tau_(tau), meta_(std::move(meta)) {
  check_tau(tau_);
  build_index();
}

SentimentModel::SentimentModel(const SentimentModel& other)
    : log_prior_(other.log_prior_),
      likelihood_(other.likelihood_),
      tau_(other.tau_),
      meta_(other.meta_) {
  build_index();
}

SentimentModel& SentimentModel::operator=(const SentimentModel& other) {
  if (this != &other) {
    SentimentModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void SentimentModel::build_index() {
  index_.clear();
  index_.reserve(likelihood_.size());
  for (const auto& [token, ll] : likelihood_) index_.emplace(token, &ll);
}

SentimentModel SentimentModel::train(std::span<const TrainingInstance> instances, double tau) {
  check_tau(tau);

  std::array<std::size_t, 2> docs{0, 0};
  std::array<std::size_t, 2> total_tokens{0, 0};
  std::map<std::string, std::array<std::size_t, 2>> counts;
  for (const auto& inst : instances) {
    const auto c = static_cast<std::size_t>(inst.label);
    ++docs[c];
    for (const auto& token : inst.tokens) {
      ++counts[token][c];
      ++total_tokens[c];
    }
  }
  if (docs[0] == 0 || docs[1] == 0) {
    throw Error(Errc::SingleClassCorpus, "training needs both positive and negative instances");
  }

  const double n = static_cast<double>(docs[0] + docs[1]);
  const std::array<double, 2> log_prior{std::log(static_cast<double>(docs[0]) / n),
                                        std::log(static_cast<double>(docs[1]) / n)};

  const double vocab = static_cast<double>(counts.size());
  std::map<std::string, LogLikelihood> likelihood;
  for (auto& [token, c] : counts) {
    LogLikelihood ll{};
    for (std::size_t k = 0; k < 2; ++k) {
      ll[k] = std::log((static_cast<double>(c[k]) + 1.0) /
                       (static_cast<double>(total_tokens[k]) + vocab));
    }
    likelihood.emplace(token, ll);
  }

  ModelMeta meta{corpus_fingerprint(instances), instances.size(), Timestamp{}};
  return SentimentModel(log_prior, std::move(likelihood), tau, std::move(meta));
}

Classification SentimentModel::classify(std::string_view text, const EmoticonLexicon& lexicon) const {
  const auto tokens = normalize(text, lexicon);
  return classify_tokens(tokens);
}

Classification SentimentModel::classify_tokens(std::span<const std::string> tokens) const {
  // Sum in token order rather than input order so the score is exactly
  // invariant under permutation of the input.
  std::map<std::string_view, std::pair<const LogLikelihood*, int>> seen;
  for (const auto& token : tokens) {
    const auto it = index_.find(token);
    if (it == index_.end()) continue;
    auto& slot = seen[it->first];
    slot.first = it->second;
    ++slot.second;
  }

  Classification out;
  if (seen.empty()) return out;

  double log_odds = log_prior_[0] - log_prior_[1];
  for (const auto& [token, entry] : seen) {
    const auto& ll = *entry.first;
    log_odds += entry.second * (ll[0] - ll[1]);
  }
  out.log_odds = log_odds;
  out.label = band_label(log_odds, tau_);
  out.confidence = 1.0 / (1.0 + std::exp(-std::abs(log_odds)));
  return out;
}

SentimentModel SentimentModel::with_tau(double tau) const {
  SentimentModel copy(*this);
  check_tau(tau);
  copy.tau_ = tau;
  return copy;
}

SentimentModel SentimentModel::with_created_at(Timestamp t) const {
  SentimentModel copy(*this);
  copy.meta_.created_at = t;
  return copy;
}

std::string SentimentModel::fingerprint() const {
  Fnv1a h;
  h.update(log_prior_[0]).update(log_prior_[1]);
  for (const auto& [token, ll] : likelihood_) {
    h.update(token).update(std::string_view("\0", 1)).update(ll[0]).update(ll[1]);
  }
  return h.hex();
}

bool SentimentModel::operator==(const SentimentModel& other) const {
  return log_prior_ == other.log_prior_ && likelihood_ == other.likelihood_ &&
         tau_ == other.tau_ && meta_ == other.meta_;
}

}  // namespace moodifier::sentiment
