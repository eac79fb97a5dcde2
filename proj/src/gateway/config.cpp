#include "moodifier/gateway/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::gateway {

namespace {

template <class T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::InvalidArgument, fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

}  // namespace

void ServiceConfig::validate() const {
  if (tau && (!std::isfinite(*tau) || *tau < 0.0)) {
    throw Error(Errc::InvalidArgument, "tau must be a finite value >= 0");
  }
  if (session_gap.count() <= 0) throw Error(Errc::InvalidArgument, "session gap must be positive");
  if (port < 0 || port > 65535) throw Error(Errc::InvalidArgument, fmt::format("port {} out of range", port));
}

std::pair<std::string, int> parse_bind(std::string_view text) {
  const auto colon = text.rfind(':');
  std::string host = "127.0.0.1";
  std::string_view port_text = text;
  if (colon != std::string_view::npos) {
    if (colon > 0) host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  const int port = parse_number<int>(port_text, "bind port");
  if (port < 0 || port > 65535) throw Error(Errc::InvalidArgument, fmt::format("port {} out of range", port));
  return {host, port};
}

ServiceConfig config_from_env(ServiceConfig base, const EnvLookup& lookup) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    if (lookup) return lookup(name);
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
  };
  if (auto v = get("MOODIFIER_BIND")) std::tie(base.host, base.port) = parse_bind(*v);
  if (auto v = get("MOODIFIER_STORE")) base.store_path = *v;
  if (auto v = get("MOODIFIER_MODEL")) base.model_path = *v;
  if (auto v = get("MOODIFIER_TAU")) base.tau = parse_number<double>(*v, "MOODIFIER_TAU");
  if (auto v = get("MOODIFIER_SESSION_GAP_MIN")) {
    base.session_gap = std::chrono::minutes{parse_number<int>(*v, "MOODIFIER_SESSION_GAP_MIN")};
  }
  if (auto v = get("MOODIFIER_STATIC")) base.static_dir = *v;
  base.validate();
  return base;
}

}  // namespace moodifier::gateway
