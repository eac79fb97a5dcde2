#include "moodifier/sentiment/normalize.hpp"

namespace moodifier::sentiment {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && ((u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) ||
                      (u >= 0x5b && u <= 0x60) || (u >= 0x7b && u <= 0x7e));
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string collapse_runs(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t run = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    run = (i > 0 && s[i] == s[i - 1]) ? run + 1 : 1;
    if (run > 2 && is_ascii_alpha(s[i])) continue;
    out.push_back(s[i]);
  }
  return out;
}

// Returns an empty string when the token should be dropped.
std::string normalize_token(std::string_view raw) {
  std::string lower(raw);
  for (auto& c : lower) c = ascii_lower(c);
  std::string_view s = lower;

  while (!s.empty() && is_punct(s.front()) && s.front() != '@') s.remove_prefix(1);
  if (s.starts_with("http://") || s.starts_with("https://")) return std::string(kUrlToken);
  while (!s.empty() && is_punct(s.back())) s.remove_suffix(1);
  if (s.size() > 1 && s.front() == '@') return std::string(kUserToken);
  while (!s.empty() && is_punct(s.front())) s.remove_prefix(1);

  return collapse_runs(s);
}

}  // namespace

ScannedText scan(std::string_view text, const EmoticonLexicon& lexicon) {
  ScannedText out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) break;
    const auto raw = text.substr(start, i - start);

    if (const auto pol = lexicon.polarity(raw)) {
      if (*pol == Valence::Positive) {
        ++out.positive_emoticons;
      } else {
        ++out.negative_emoticons;
      }
      continue;
    }
    auto token = normalize_token(raw);
    if (!token.empty()) out.tokens.push_back(std::move(token));
  }
  return out;
}

TokenSequence normalize(std::string_view text, const EmoticonLexicon& lexicon) {
  return scan(text, lexicon).tokens;
}

}  // namespace moodifier::sentiment
