#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace moodifier::gateway {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path store_path = "moodifier-store";
  std::filesystem::path model_path = "model.json";
  std::optional<double> tau;
  std::chrono::minutes session_gap{30};
  std::optional<std::filesystem::path> static_dir;
  std::uint64_t assignment_seed = 20190301;

  // Throws Error(InvalidArgument) for a negative or non-finite tau, a
  // non-positive session gap or an out-of-range port.
  void validate() const;
};

// "host:port", ":port" or "port". Throws Error(InvalidArgument).
std::pair<std::string, int> parse_bind(std::string_view text);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

// Reads MOODIFIER_BIND, MOODIFIER_STORE, MOODIFIER_MODEL, MOODIFIER_TAU,
// MOODIFIER_SESSION_GAP_MIN and MOODIFIER_STATIC on top of `base`.
ServiceConfig config_from_env(ServiceConfig base = {}, const EnvLookup& lookup = {});

}  // namespace moodifier::gateway
