#include "moodifier/common/error.hpp"
#include "moodifier/sentiment/model.hpp"

namespace moodifier::sentiment {

namespace {

template <typename TextOf, typename Range>
std::vector<TrainingInstance> build(const Range& items, TextOf text_of, const EmoticonLexicon& lexicon) {
  std::vector<TrainingInstance> out;
  for (const auto& item : items) {
    auto scanned = scan(text_of(item), lexicon);
    const bool pos = scanned.positive_emoticons > 0;
    const bool neg = scanned.negative_emoticons > 0;
    if (pos == neg || scanned.tokens.empty()) continue;
    out.push_back({std::move(scanned.tokens), pos ? Polarity::Positive : Polarity::Negative});
  }
  if (out.empty()) {
    throw Error(Errc::EmptyCorpus, "no post carries an unambiguous emoticon label");
  }
  return out;
}

}  // namespace

std::vector<TrainingInstance> build_distant_corpus(std::span<const Post> posts,
                                                   const EmoticonLexicon& lexicon) {
  return build(posts, [](const Post& p) -> std::string_view { return p.text; }, lexicon);
}

std::vector<TrainingInstance> build_distant_corpus(std::span<const std::string> texts,
                                                   const EmoticonLexicon& lexicon) {
  return build(texts, [](const std::string& t) -> std::string_view { return t; }, lexicon);
}

}  // namespace moodifier::sentiment
