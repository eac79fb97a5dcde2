#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "moodifier/common/post.hpp"
#include "moodifier/common/time.hpp"
#include "moodifier/sentiment/lexicon.hpp"
#include "moodifier/sentiment/model.hpp"

namespace moodifier::testing {

inline Timestamp ts(const char* text) { return parse_timestamp(text); }

inline Post make_post(std::string id, std::string author, std::string text, Timestamp at,
                      bool is_protected = false) {
  Post p;
  p.id = std::move(id);
  p.author_id = std::move(author);
  p.text = std::move(text);
  p.created_at = at;
  p.is_protected = is_protected;
  return p;
}

// Small corpus with clearly separated vocabularies.
inline sentiment::SentimentModel tiny_model(double tau = 0.5) {
  const std::vector<std::string> texts{
      "love this sunny day :)",  "great happy news :)",   "so happy and glad :)",
      "what a lovely win :)",    "love love love :)",     "awesome great fun :)",
      "hate this rainy day :(",  "awful sad news :(",     "so sad and tired :(",
      "what a terrible loss :(", "hate hate hate :(",     "worst boring pain :(",
  };
  const auto corpus = sentiment::build_distant_corpus(texts, sentiment::EmoticonLexicon::builtin());
  return sentiment::SentimentModel::train(corpus, tau);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / fmt::format("moodifier-test-{:016x}",
                                                                 (std::uint64_t{rd()} << 32) | rd());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace moodifier::testing
