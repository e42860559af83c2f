// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>

#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

TimestampMs wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::optional<NetworkDescriptor> load_network(const std::filesystem::path& dir) {
  std::ifstream in(dir / kNetworkFile);
  if (!in) return std::nullopt;
  auto net = json::parse(in).get<NetworkDescriptor>();
  if (auto problem = check_network(net); !problem.empty()) {
    throw std::invalid_argument("invalid " + std::string(kNetworkFile) + ": " + problem);
  }
  return net;
}

Monitor::Monitor(Store& store, MonitorOptions options) : store_(store), options_(std::move(options)) {
  for (const auto& src : options_.sources) collectors_.emplace_back(store_, src);
}

Monitor::~Monitor() { stop(); }

std::size_t Monitor::poll_once() {
  std::size_t stored = 0;
  for (auto& collector : collectors_) {
    const auto key = collector.cursor_key();
    try {
      stored += collector.poll().stored;
      std::lock_guard lock(mutex_);
      errors_.erase(key);
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex_);
      errors_[key] = e.what();
    }
  }
  loaded_ = true;
  return stored;
}

Evaluation Monitor::evaluate(TimestampMs now) { return ledgerwatch::evaluate(store_, options_.rules, now); }

std::map<std::string, std::string> Monitor::source_errors() const {
  std::lock_guard lock(mutex_);
  return errors_;
}

void Monitor::start() {
  {
    std::lock_guard lock(mutex_);
    if (ingest_thread_.joinable()) return;
    stopping_ = false;
  }
  ingest_thread_ = std::thread([this] { ingest_loop(); });
  evaluate_thread_ = std::thread([this] { evaluate_loop(); });
}

void Monitor::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (ingest_thread_.joinable()) ingest_thread_.join();
  if (evaluate_thread_.joinable()) evaluate_thread_.join();
}

void Monitor::ingest_loop() {
  using clock = std::chrono::steady_clock;
  std::vector<clock::time_point> due(collectors_.size(), clock::now());
  while (true) {
    const auto now = clock::now();
    for (std::size_t i = 0; i < collectors_.size(); ++i) {
      if (now < due[i]) continue;
      const auto key = collectors_[i].cursor_key();
      try {
        collectors_[i].poll();
        std::lock_guard lock(mutex_);
        errors_.erase(key);
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        errors_[key] = e.what();
      }
      due[i] = now + std::chrono::milliseconds(collectors_[i].source().poll_interval);
    }
    loaded_ = true;

    auto next = due.empty() ? clock::now() + std::chrono::seconds(1)
                            : *std::min_element(due.begin(), due.end());
    std::unique_lock lock(mutex_);
    if (wake_.wait_until(lock, next, [this] { return stopping_; })) return;
  }
}

void Monitor::evaluate_loop() {
  const auto cadence = std::chrono::milliseconds(options_.evaluation_cadence);
  auto next = std::chrono::steady_clock::now() + cadence;
  while (true) {
    {
      std::unique_lock lock(mutex_);
      if (wake_.wait_until(lock, next, [this] { return stopping_; })) return;
    }
    next += cadence;
    if (!loaded_) continue;
    try {
      evaluate(wall_clock_ms());
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex_);
      errors_["evaluation"] = e.what();
    }
  }
}

std::vector<Alert> replay(const std::filesystem::path& dir, const RuleConfig& rules) {
  if (!std::filesystem::is_directory(dir)) {
    throw IngestError(IngestError::Code::SourceUnavailable, dir.string() + " is not a directory");
  }
  Store store;
  MonitorOptions options;
  for (auto src : trace_sources(dir)) {
    if (std::filesystem::exists(dir / std::string(source_file(src.kind)))) {
      options.sources.push_back(std::move(src));
    }
  }
  options.rules = rules;
  Monitor monitor(store, options);
  monitor.poll_once();
  monitor.evaluate(std::numeric_limits<TimestampMs>::max());

  auto alerts = store.alerts();
  std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    return std::tie(a.raised_at, a.alert_id) < std::tie(b.raised_at, b.alert_id);
  });
  return alerts;
}

}  // namespace ledgerwatch
