// SPDX-License-Identifier: Apache-2.0
//
// Detection rules and the chaincode checker.
//
// Rules are pure functions over aggregated data. Alert ids are derived from the triggering
// condition (rule, natural key, window start), so re-running a rule over the same data
// yields the same ids; evaluate_all uses that to persist each condition once.
#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerwatch/analytics.hpp"
#include "ledgerwatch/model.hpp"
#include "ledgerwatch/store.hpp"

namespace ledgerwatch {

struct RuleConfig {
  double link_dev_threshold = 0.8;
  std::uint32_t link_dev_sustain = 2;
  double flood_multiplier = 10.0;
  std::uint64_t flood_min_count = 50;
  std::uint32_t flood_baseline_window = 60;
  double size_multiplier = 10.0;
  std::uint64_t size_min_bytes = 102'400;
  double latency_threshold_s = 5.0;

  friend bool operator==(const RuleConfig&, const RuleConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty string when every field is within range.
std::string check_rule_config(const RuleConfig& cfg);

/// Parses `key = value` lines ('#' comments) or, if the text starts with '{', a JSON object.
/// Unknown keys, malformed values and out-of-range fields throw ConfigError.
RuleConfig parse_rule_config(std::string_view text);
RuleConfig load_rule_config(const std::filesystem::path& path);

// --- chaincode checker ------------------------------------------------------

std::vector<Finding> scan_findings(const ChaincodeIR& cc);

/// Report id is "<chaincode>@<scanned_at>".
ScanReport scan_chaincode(const ChaincodeIR& cc, TimestampMs scanned_at = 0);

// --- rules ------------------------------------------------------------------

namespace rules {
inline constexpr const char* kConfigChange = "config_change";
inline constexpr const char* kScanFindings = "scan_findings";
inline constexpr const char* kTxFlood = "tx_flood";
inline constexpr const char* kTxSize = "tx_size";
inline constexpr const char* kLatency = "latency";
inline constexpr const char* kLinkDeviation = "link_deviation";
inline constexpr const char* kIngestParseError = "ingest_parse_error";
inline constexpr const char* kStreamViolation = "stream_violation";
}  // namespace rules

std::optional<Alert> rule_config_change(const Transaction& tx);
std::optional<Alert> rule_scan_findings(const ScanReport& report);

/// `buckets` is a contiguous MIN_1 series.
std::vector<Alert> rule_tx_flood(std::span<const TxBucket> buckets, const RuleConfig& cfg);
std::vector<Alert> rule_tx_size(std::span<const TxBucket> buckets, const RuleConfig& cfg);
std::vector<Alert> rule_latency(std::span<const LatencyBucket> buckets, const RuleConfig& cfg);

/// One link evaluated at consecutive one-minute instants.
struct LinkEvaluation {
  TimestampMs at = 0;
  double deviation = 0.0;
};

std::vector<Alert> rule_link_deviation(const std::string& source, const std::string& target,
                                       std::span<const LinkEvaluation> evaluations,
                                       const RuleConfig& cfg);

/// Which sources an ingestion warning came from; selects its threat codes.
enum class SourceKind { Blocks, Metrics, Logs, Scans, Issues };

Alert parse_error_alert(SourceKind source, std::uint64_t line, const std::string& raw,
                        const std::string& message, TimestampMs detected_at);
Alert stream_violation_alert(const std::vector<StreamViolation>& violations,
                             TimestampMs detected_at);

/// Threat codes bound to a monitoring task.
struct TaskBinding {
  const char* task;
  const char* description;
  std::vector<ThreatCode> codes;
  std::vector<const char*> rules;  // empty: analyst-driven, surfaced through the API only
};

const std::vector<TaskBinding>& task_bindings();

// --- evaluation ---------------------------------------------------------------

struct Evaluation {
  std::vector<Alert> raised;      // ids not seen before, now persisted
  std::vector<Alert> superseded;  // existing ids whose window grew
};

/// Recomputes every rule over the stored data up to each stream's complete prefix (and never
/// past `now`), appends unseen alerts and supersedes extended ones. Single-flight.
Evaluation evaluate(Store& store, const RuleConfig& cfg, TimestampMs now);

/// Same as evaluate(), returning only the newly raised alerts.
std::vector<Alert> evaluate_all(Store& store, const RuleConfig& cfg, TimestampMs now);

/// Every alert the rules produce for the stored data, without touching the store.
std::vector<Alert> compute_alerts(const Store& store, const RuleConfig& cfg, TimestampMs now);

}  // namespace ledgerwatch
