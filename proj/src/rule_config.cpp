// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ledgerwatch/detect.hpp"
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view key, std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t as_count(std::string_view key, double value) {
  if (value < 1 || value != std::floor(value) || value > 1e15) {
    throw ConfigError(std::string(key) + " must be a positive integer");
  }
  return static_cast<std::uint64_t>(value);
}

void set_field(RuleConfig& cfg, std::string_view key, double value) {
  if (key == "link_dev_threshold") {
    cfg.link_dev_threshold = value;
  } else if (key == "link_dev_sustain") {
    cfg.link_dev_sustain = static_cast<std::uint32_t>(as_count(key, value));
  } else if (key == "flood_multiplier") {
    cfg.flood_multiplier = value;
  } else if (key == "flood_min_count") {
    cfg.flood_min_count = as_count(key, value);
  } else if (key == "flood_baseline_window") {
    cfg.flood_baseline_window = static_cast<std::uint32_t>(as_count(key, value));
  } else if (key == "size_multiplier") {
    cfg.size_multiplier = value;
  } else if (key == "size_min_bytes") {
    cfg.size_min_bytes = as_count(key, value);
  } else if (key == "latency_threshold_s") {
    cfg.latency_threshold_s = value;
  } else {
    throw ConfigError("unknown rule setting: " + std::string(key));
  }
}

}  // namespace

std::string check_rule_config(const RuleConfig& cfg) {
  if (!(cfg.link_dev_threshold > 0.0 && cfg.link_dev_threshold <= 1.0)) {
    return "link_dev_threshold must be in (0, 1]";
  }
  if (cfg.link_dev_sustain < 1) return "link_dev_sustain must be positive";
  if (!(cfg.flood_multiplier >= 1.0)) return "flood_multiplier must be at least 1";
  if (cfg.flood_min_count < 1) return "flood_min_count must be positive";
  if (cfg.flood_baseline_window < 1) return "flood_baseline_window must be positive";
  if (!(cfg.size_multiplier >= 1.0)) return "size_multiplier must be at least 1";
  if (cfg.size_min_bytes < 1) return "size_min_bytes must be positive";
  if (!(cfg.latency_threshold_s > 0.0)) return "latency_threshold_s must be positive";
  return {};
}

RuleConfig parse_rule_config(std::string_view text) {
  RuleConfig cfg;
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed rule config: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (!value.is_number()) throw ConfigError(key + " must be a number");
      set_field(cfg, key, value.get<double>());
    }
  } else {
    std::istringstream in{std::string(body)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      std::string_view view = line;
      if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
      view = trim(view);
      if (view.empty()) continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(number) + ": expected key = value");
      }
      const auto key = trim(view.substr(0, eq));
      set_field(cfg, key, parse_number(key, trim(view.substr(eq + 1))));
    }
  }
  if (auto problem = check_rule_config(cfg); !problem.empty()) throw ConfigError(problem);
  return cfg;
}

RuleConfig load_rule_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_rule_config(buffer.str());
}

}  // namespace ledgerwatch
