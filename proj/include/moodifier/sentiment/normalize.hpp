#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "moodifier/sentiment/lexicon.hpp"

namespace moodifier::sentiment {

inline constexpr std::string_view kUserToken = "USER";
inline constexpr std::string_view kUrlToken = "URL";

using TokenSequence = std::vector<std::string>;

// Tweet normalization, applied identically at training and inference:
//  - split on ASCII whitespace
//  - tokens equal to a lexicon emoticon are removed
//  - @-mentions become USER, http(s) links become URL
//  - ASCII letters are lowercased and runs of one letter longer than two
//    are collapsed to two ("looove" -> "loove")
//  - leading/trailing ASCII punctuation is trimmed; tokens left empty
//    (pure punctuation) are dropped
TokenSequence normalize(std::string_view text, const EmoticonLexicon& lexicon);

struct ScannedText {
  TokenSequence tokens;
  std::size_t positive_emoticons = 0;
  std::size_t negative_emoticons = 0;
};

// normalize() plus a count of the emoticons that were stripped.
ScannedText scan(std::string_view text, const EmoticonLexicon& lexicon);

}  // namespace moodifier::sentiment
