#include "moodifier/sentiment/lexicon.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::sentiment {

namespace detail {
extern const std::string_view kBuiltinLexiconText;
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

EmoticonLexicon::EmoticonLexicon(std::set<std::string> positive, std::set<std::string> negative)
    : positive_(positive.begin(), positive.end()), negative_(negative.begin(), negative.end()) {
  if (positive_.empty() || negative_.empty()) {
    throw Error(Errc::InvalidLexicon, "lexicon needs at least one positive and one negative entry");
  }
  for (const auto& p : positive_) {
    if (negative_.contains(p)) {
      throw Error(Errc::InvalidLexicon, fmt::format("'{}' listed as both positive and negative", p));
    }
  }
}

EmoticonLexicon EmoticonLexicon::parse(std::istream& in) {
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string>* section = nullptr;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line == "+") {
      section = &positive;
    } else if (line == "-" || line == "−") {
      section = &negative;
    } else if (section == nullptr) {
      throw Error(Errc::InvalidLexicon,
                  fmt::format("line {}: entry before any '+'/'-' section header", line_no));
    } else {
      section->emplace(line);
    }
  }
  return EmoticonLexicon(std::move(positive), std::move(negative));
}

EmoticonLexicon EmoticonLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::Io, fmt::format("cannot open lexicon '{}'", path.string()));
  }
  return parse(in);
}

const EmoticonLexicon& EmoticonLexicon::builtin() {
  static const EmoticonLexicon lexicon = [] {
    std::istringstream in{std::string(detail::kBuiltinLexiconText)};
    return parse(in);
  }();
  return lexicon;
}

std::optional<Valence> EmoticonLexicon::polarity(std::string_view token) const {
  if (positive_.find(token) != positive_.end()) return Valence::Positive;
  if (negative_.find(token) != negative_.end()) return Valence::Negative;
  return std::nullopt;
}

}  // namespace moodifier::sentiment
