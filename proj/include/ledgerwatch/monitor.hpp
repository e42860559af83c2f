// SPDX-License-Identifier: Apache-2.0
//
// The running pipeline: collectors feeding a store plus the detection loop.
#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ledgerwatch/detect.hpp"
#include "ledgerwatch/ingest.hpp"
#include "ledgerwatch/store.hpp"

namespace ledgerwatch {

/// Reads network.json from a trace directory; nullopt if absent. Throws on malformed content.
std::optional<NetworkDescriptor> load_network(const std::filesystem::path& dir);

struct MonitorOptions {
  std::vector<SourceDescriptor> sources;
  RuleConfig rules;
  DurationMs evaluation_cadence = kMinute;
  std::optional<NetworkDescriptor> network;
};

class Monitor {
 public:
  Monitor(Store& store, MonitorOptions options);
  ~Monitor();
  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;

  Store& store() { return store_; }
  const Store& store() const { return store_; }
  const MonitorOptions& options() const { return options_; }

  /// Polls every source once, in order. Unavailable sources are recorded, not thrown.
  std::size_t poll_once();

  Evaluation evaluate(TimestampMs now);

  /// True once every source has been polled at least once.
  bool loaded() const { return loaded_.load(); }

  /// Last error per source cursor key; cleared on the next successful poll.
  std::map<std::string, std::string> source_errors() const;

  /// Background ingestion (each source on its poll interval) and evaluation (on the cadence).
  void start();
  void stop();

 private:
  void ingest_loop();
  void evaluate_loop();

  Store& store_;
  MonitorOptions options_;
  std::vector<Collector> collectors_;
  std::atomic<bool> loaded_{false};

  mutable std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::map<std::string, std::string> errors_;
  std::thread ingest_thread_;
  std::thread evaluate_thread_;
};

/// Offline detection over a complete trace directory with an in-memory store. Returns every
/// alert, ordered by (raised_at, alert_id).
std::vector<Alert> replay(const std::filesystem::path& dir, const RuleConfig& rules);

/// Wall-clock UTC milliseconds.
TimestampMs wall_clock_ms();

}  // namespace ledgerwatch
