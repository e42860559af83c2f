// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "ledgerwatch/api.hpp"
#include "ledgerwatch/util.hpp"

namespace ledgerwatch {

namespace {

DurationMs duration_field(const std::string& key, const json& value) {
  if (value.is_number_integer()) return value.get<DurationMs>();
  if (value.is_string()) {
    if (auto d = parse_duration(value.get<std::string>())) return *d;
  }
  throw ConfigError("invalid duration for " + key);
}

DurationMs duration_text(const std::string& key, std::string_view text) {
  if (auto d = parse_duration(text)) return *d;
  throw ConfigError("invalid duration for " + key + ": '" + std::string(text) + "'");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::optional<ListenAddress> parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  int port = -1;
  const auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || port < 0 ||
      port > 65535) {
    return std::nullopt;
  }
  return ListenAddress{std::string(text.substr(0, colon)), port};
}

ApiConfig parse_api_config(const json& j, ApiConfig config) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "listen_address") {
        config.listen_address = value.get<std::string>();
      } else if (key == "data_dir") {
        config.data_dir = value.get<std::string>();
      } else if (key == "cors_origins") {
        config.cors_origins = value.get<std::vector<std::string>>();
      } else if (key == "evaluation_cadence") {
        config.evaluation_cadence = duration_field(key, value);
      } else if (key == "poll_interval") {
        config.poll_interval = duration_field(key, value);
      } else if (key == "store_dir") {
        config.store_dir = value.get<std::string>();
      } else if (key == "static_dir") {
        config.static_dir = value.get<std::string>();
      } else if (key == "rules_file") {
        config.rules_file = value.get<std::string>();
      } else {
        throw ConfigError("unknown configuration key: " + key);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return config;
}

ApiConfig load_api_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return parse_api_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed " + path.string() + ": " + e.what());
  }
}

void apply_env_overrides(ApiConfig& config, const std::function<const char*(const char*)>& getenv) {
  auto get = [&getenv](const char* name) -> const char* {
    return getenv ? getenv(name) : std::getenv(name);
  };
  if (auto v = get("LW_LISTEN_ADDRESS")) config.listen_address = v;
  if (auto v = get("LW_DATA_DIR")) config.data_dir = v;
  if (auto v = get("LW_CORS_ORIGINS")) config.cors_origins = split_list(v);
  if (auto v = get("LW_EVALUATION_CADENCE")) {
    config.evaluation_cadence = duration_text("LW_EVALUATION_CADENCE", v);
  }
  if (auto v = get("LW_POLL_INTERVAL")) config.poll_interval = duration_text("LW_POLL_INTERVAL", v);
  if (auto v = get("LW_STORE_DIR")) config.store_dir = v;
  if (auto v = get("LW_STATIC_DIR")) config.static_dir = v;
  if (auto v = get("LW_RULES_FILE")) config.rules_file = v;
}

std::string check_api_config(const ApiConfig& config) {
  if (!parse_listen_address(config.listen_address)) {
    return "listen_address must be host:port, got '" + config.listen_address + "'";
  }
  if (config.data_dir.empty() || !std::filesystem::is_directory(config.data_dir)) {
    return "data_dir '" + config.data_dir.string() + "' is not a directory";
  }
  if (config.evaluation_cadence <= 0) return "evaluation_cadence must be positive";
  if (config.poll_interval < kMinPollInterval) return "poll_interval must be at least 100 ms";
  if (config.static_dir && !std::filesystem::is_directory(*config.static_dir)) {
    return "static_dir '" + config.static_dir->string() + "' is not a directory";
  }
  return {};
}

}  // namespace ledgerwatch
