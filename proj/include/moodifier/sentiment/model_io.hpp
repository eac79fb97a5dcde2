#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "moodifier/sentiment/model.hpp"

namespace moodifier::sentiment {

inline constexpr std::string_view kModelFormat = "moodifier-sentiment-model";
inline constexpr int kModelFormatVersion = 1;

// Self-describing JSON document. Doubles are written in shortest
// round-trip form, so save(load(save(m))) is byte-identical and
// load(save(m)) == m bit for bit.
std::string serialize_model(const SentimentModel& model);
SentimentModel deserialize_model(std::string_view document);

void save_model(const SentimentModel& model, const std::filesystem::path& path);
// Throws Error(Io) if the file cannot be read and Error(ModelFormat) if it
// is not a supported model document.
SentimentModel load_model(const std::filesystem::path& path);

}  // namespace moodifier::sentiment
