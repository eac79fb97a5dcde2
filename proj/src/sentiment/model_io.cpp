#include "moodifier/sentiment/model_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "moodifier/common/error.hpp"

namespace moodifier::sentiment {

using nlohmann::json;

std::string serialize_model(const SentimentModel& model) {
  json vocab = json::array();
  json likelihood = json::object();
  for (const auto& [token, ll] : model.likelihoods()) {
    vocab.push_back(token);
    likelihood[token] = {ll[0], ll[1]};
  }
  json doc = {
      {"format", kModelFormat},
      {"version", kModelFormatVersion},
      {"classes", {"positive", "negative"}},
      {"tau", model.tau()},
      {"log_prior", {{"positive", model.log_prior(Polarity::Positive)},
                     {"negative", model.log_prior(Polarity::Negative)}}},
      {"vocabulary", std::move(vocab)},
      {"log_likelihood", std::move(likelihood)},
      {"meta",
       {{"corpus_fingerprint", model.meta().corpus_fingerprint},
        {"instance_count", model.meta().instance_count},
        {"created_at", format_timestamp(model.meta().created_at)}}},
  };
  return doc.dump() + "\n";
}

SentimentModel deserialize_model(std::string_view document) {
  try {
    const json doc = json::parse(document);
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw Error(Errc::ModelFormat, "not a moodifier sentiment model");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(Errc::ModelFormat, fmt::format("unsupported model version {}", version));
    }
    std::map<std::string, SentimentModel::LogLikelihood> likelihood;
    const auto& ll = doc.at("log_likelihood");
    for (const auto& token : doc.at("vocabulary")) {
      const auto key = token.get<std::string>();
      const auto& pair = ll.at(key);
      likelihood.emplace(key, SentimentModel::LogLikelihood{pair.at(0).get<double>(),
                                                            pair.at(1).get<double>()});
    }
    if (likelihood.size() != ll.size()) {
      throw Error(Errc::ModelFormat, "vocabulary and likelihood table disagree");
    }
    const auto& meta_doc = doc.at("meta");
    ModelMeta meta{meta_doc.at("corpus_fingerprint").get<std::string>(),
                   meta_doc.at("instance_count").get<std::size_t>(),
                   parse_timestamp(meta_doc.at("created_at").get<std::string>())};
    const auto& prior = doc.at("log_prior");
    return SentimentModel({prior.at("positive").get<double>(), prior.at("negative").get<double>()},
                          std::move(likelihood), doc.at("tau").get<double>(), std::move(meta));
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, fmt::format("malformed model document: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == Errc::ModelFormat) throw;
    throw Error(Errc::ModelFormat, e.what());
  }
}

void save_model(const SentimentModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write model '{}'", path.string()));
  out << serialize_model(model);
  if (!out) throw Error(Errc::Io, fmt::format("short write to '{}'", path.string()));
}

SentimentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open model '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace moodifier::sentiment
