#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "moodifier/common/valence.hpp"

namespace moodifier::sentiment {

// Positive and negative emoticon surface strings. The two sets are
// disjoint and non-empty; entries match whole whitespace-delimited tokens.
class EmoticonLexicon {
 public:
  // Throws Error(InvalidLexicon) if either set is empty or they intersect.
  EmoticonLexicon(std::set<std::string> positive, std::set<std::string> negative);

  // Lexicon file format: one entry per line, "#" comments, and a line
  // holding only "+" or "-" (U+2212 also accepted) switching sections.
  static EmoticonLexicon parse(std::istream& in);
  static EmoticonLexicon load(const std::filesystem::path& path);

  // The lexicon shipped in data/emoticons.txt.
  static const EmoticonLexicon& builtin();

  // Positive or Negative for a lexicon entry, nullopt otherwise.
  std::optional<Valence> polarity(std::string_view token) const;
  bool contains(std::string_view token) const { return polarity(token).has_value(); }

  const std::set<std::string, std::less<>>& positive() const { return positive_; }
  const std::set<std::string, std::less<>>& negative() const { return negative_; }

 private:
  std::set<std::string, std::less<>> positive_;
  std::set<std::string, std::less<>> negative_;
};

}  // namespace moodifier::sentiment
