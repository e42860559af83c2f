// SPDX-License-Identifier: Apache-2.0
//
// HTTP/1.1 JSON API over a running Monitor, including the server-sent alert stream.
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ledgerwatch/monitor.hpp"

namespace ledgerwatch {

struct ApiConfig {
  std::string listen_address = "127.0.0.1:8080";
  std::filesystem::path data_dir;
  std::vector<std::string> cors_origins;
  DurationMs evaluation_cadence = kMinute;
  DurationMs poll_interval = kSecond;
  std::optional<std::filesystem::path> store_dir;   // default <data_dir>/store
  std::optional<std::filesystem::path> static_dir;  // built UI bundle, served at /
  std::optional<std::filesystem::path> rules_file;
};

struct ListenAddress {
  std::string host;
  int port = 0;
};

std::optional<ListenAddress> parse_listen_address(std::string_view text);

/// Fields named as in ApiConfig; durations as "60s"-style strings or integer ms.
/// Unknown keys throw ConfigError.
ApiConfig parse_api_config(const json& j, ApiConfig base = {});
ApiConfig load_api_config(const std::filesystem::path& path);

/// Applies LW_<FIELD> variables (e.g. LW_LISTEN_ADDRESS, LW_CORS_ORIGINS as a comma list).
/// `getenv` is injectable for tests.
void apply_env_overrides(ApiConfig& config,
                         const std::function<const char*(const char*)>& getenv = nullptr);

/// Empty string when the configuration can be served.
std::string check_api_config(const ApiConfig& config);

class ApiServer {
 public:
  ApiServer(Monitor& monitor, ApiConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listen address (port 0 picks a free port). False if the port is unavailable.
  bool bind();
  int port() const { return port_; }

  /// Serves on a background thread until stop().
  void start();
  void stop();

  /// Keepalive period of idle alert streams.
  void set_stream_keepalive(DurationMs period) { keepalive_ = period; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Monitor& monitor_;
  ApiConfig config_;
  int port_ = 0;
  DurationMs keepalive_ = 15 * kSecond;
  std::thread thread_;
};

}  // namespace ledgerwatch
