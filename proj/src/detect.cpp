// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "ledgerwatch/util.hpp"

namespace ledgerwatch {

namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

struct Run {
  std::size_t first;
  std::size_t last;  // inclusive
  double peak;
};

/// Skip points neither extend nor break a run (null buckets, no history yet).
struct Point {
  enum Mark { Skip, Miss, Hit } mark = Skip;
  double value = 0.0;
};

/// Maximal runs of consecutive hits.
template <typename Classify>
std::vector<Run> maximal_runs(std::size_t n, Classify classify) {
  std::vector<Run> runs;
  std::optional<Run> open;
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = classify(i);
    if (p.mark == Point::Skip) continue;
    if (p.mark == Point::Hit) {
      if (open) {
        open->last = i;
        open->peak = std::max(open->peak, p.value);
      } else {
        open = Run{i, i, p.value};
      }
    } else if (open) {
      runs.push_back(*open);
      open.reset();
    }
  }
  if (open) runs.push_back(*open);
  return runs;
}

Alert window_alert(std::string rule, std::string id_key, TimestampMs from, TimestampMs to,
                   std::vector<ThreatCode> codes, std::string metric, Labels labels,
                   std::string summary) {
  Alert alert;
  alert.alert_id = rule + "-" + id_key;
  alert.rule = std::move(rule);
  alert.raised_at = from + kMinute;
  alert.threat_codes = std::move(codes);
  alert.severity = AlertSeverity::Warning;
  alert.summary = std::move(summary);
  alert.evidence.push_back(WindowEvidence{std::move(metric), std::move(labels), from, to});
  return alert;
}

}  // namespace

// ---------------------------------------------------------------------------
// Chaincode checker

std::vector<Finding> scan_findings(const ChaincodeIR& cc) {
  std::vector<Finding> findings;
  for (const auto& fn : cc.functions) {
    std::set<std::string> written;
    std::set<std::string> flagged;
    for (const auto& op : fn.ops) {
      switch (op.kind) {
        case OpKind::Write:
          written.insert(op.arg);
          break;
        case OpKind::Read:
          if (written.contains(op.arg) && flagged.insert(op.arg).second) {
            findings.push_back(
                {FindingRule::ReadAfterWrite, fn.name, op.arg, FindingSeverity::High});
          }
          break;
        case OpKind::Random:
        case OpKind::Timestamp:
          findings.push_back({FindingRule::Nondeterminism, fn.name,
                              std::string(to_string(op.kind)), FindingSeverity::Medium});
          break;
        case OpKind::RangeRead:
        case OpKind::Other:
          break;
      }
    }
  }
  std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.function, a.rule, a.key_or_source) <
           std::tie(b.function, b.rule, b.key_or_source);
  });
  return findings;
}

ScanReport scan_chaincode(const ChaincodeIR& cc, TimestampMs scanned_at) {
  return ScanReport{cc.name + "@" + std::to_string(scanned_at), cc.name, scanned_at,
                    scan_findings(cc)};
}

// ---------------------------------------------------------------------------
// Rules

std::optional<Alert> rule_config_change(const Transaction& tx) {
  if (tx.tx_type != TxType::Config) return std::nullopt;
  Alert alert;
  alert.alert_id = std::string(rules::kConfigChange) + "-" + tx.tx_id;
  alert.rule = rules::kConfigChange;
  alert.raised_at = tx.timestamp;
  alert.threat_codes = {ThreatCode::AC1, ThreatCode::C1};
  alert.severity = AlertSeverity::High;
  alert.summary = "Channel configuration changed by " + tx.creator_msp + " in block " +
                  std::to_string(tx.block_num);
  alert.evidence = {TxEvidence{tx.tx_id}, BlockEvidence{tx.block_num}};
  return alert;
}

std::optional<Alert> rule_scan_findings(const ScanReport& report) {
  if (report.findings.empty()) return std::nullopt;
  const bool high = std::any_of(report.findings.begin(), report.findings.end(),
                                [](const Finding& f) { return f.severity == FindingSeverity::High; });
  Alert alert;
  alert.alert_id = std::string(rules::kScanFindings) + "-" + report.report_id;
  alert.rule = rules::kScanFindings;
  alert.raised_at = report.scanned_at;
  alert.threat_codes = {ThreatCode::SC1, ThreatCode::SC2, ThreatCode::SC3};
  alert.severity = high ? AlertSeverity::High : AlertSeverity::Warning;
  alert.summary = "Chaincode " + report.chaincode + ": " + std::to_string(report.findings.size()) +
                  (report.findings.size() == 1 ? " finding" : " findings");
  alert.evidence = {ScanEvidence{report.report_id}};
  return alert;
}

std::vector<Alert> rule_tx_flood(std::span<const TxBucket> buckets, const RuleConfig& cfg) {
  const auto window = static_cast<std::size_t>(cfg.flood_baseline_window);
  auto runs = maximal_runs(buckets.size(), [&](std::size_t i) -> Point {
    if (i == 0) return {};
    std::vector<double> history;
    for (std::size_t k = i > window ? i - window : 0; k < i; ++k) {
      history.push_back(static_cast<double>(buckets[k].total));
    }
    const double threshold =
        std::max(static_cast<double>(cfg.flood_min_count), cfg.flood_multiplier * median(history));
    const auto total = static_cast<double>(buckets[i].total);
    if (total > threshold) return {Point::Hit, total};
    return {Point::Miss};
  });

  std::vector<Alert> alerts;
  for (const auto& run : runs) {
    const auto from = buckets[run.first].bucket_start;
    const auto to = buckets[run.last].bucket_start + kMinute;
    alerts.push_back(window_alert(rules::kTxFlood, std::to_string(from), from, to,
                                  {ThreatCode::N2, ThreatCode::C2}, "tx_count", {},
                                  format("Transaction volume surge, peak %.0f tx/min over %.0f min",
                                         run.peak, static_cast<double>((to - from) / kMinute))));
  }
  return alerts;
}

std::vector<Alert> rule_tx_size(std::span<const TxBucket> buckets, const RuleConfig& cfg) {
  std::set<MspId> msps;
  for (const auto& b : buckets) {
    for (const auto& [msp, avg] : b.avg_size_by_msp) msps.insert(msp);
  }

  const auto window = static_cast<std::size_t>(cfg.flood_baseline_window);
  std::vector<Alert> alerts;
  for (const auto& msp : msps) {
    // Bucket indexes where this MSP submitted anything, and the matching mean sizes.
    std::vector<std::size_t> index;
    std::vector<double> sizes;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
      auto it = buckets[i].avg_size_by_msp.find(msp);
      if (it == buckets[i].avg_size_by_msp.end()) continue;
      index.push_back(i);
      sizes.push_back(it->second);
    }
    auto runs = maximal_runs(sizes.size(), [&](std::size_t i) -> Point {
      if (i == 0) return {};
      std::vector<double> history(sizes.begin() + static_cast<std::ptrdiff_t>(i > window ? i - window : 0),
                                  sizes.begin() + static_cast<std::ptrdiff_t>(i));
      const double threshold =
          std::max(static_cast<double>(cfg.size_min_bytes), cfg.size_multiplier * median(history));
      if (sizes[i] > threshold) return {Point::Hit, sizes[i]};
      return {Point::Miss};
    });
    for (const auto& run : runs) {
      const auto from = buckets[index[run.first]].bucket_start;
      const auto to = buckets[index[run.last]].bucket_start + kMinute;
      alerts.push_back(window_alert(
          rules::kTxSize, msp + "-" + std::to_string(from), from, to, {ThreatCode::N2},
          "avg_tx_size", {{"msp", msp}},
          "Oversized transactions from " + msp +
              format(", peak mean %.0f bytes over %.0f min", run.peak,
                     static_cast<double>((to - from) / kMinute))));
    }
  }
  std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    return std::tie(a.raised_at, a.alert_id) < std::tie(b.raised_at, b.alert_id);
  });
  return alerts;
}

std::vector<Alert> rule_latency(std::span<const LatencyBucket> buckets, const RuleConfig& cfg) {
  auto runs = maximal_runs(buckets.size(), [&](std::size_t i) -> Point {
    double sum = 0.0;
    bool any = false;
    for (const auto& mean : buckets[i].means) {
      if (!mean) continue;
      sum += *mean;
      any = true;
    }
    if (!any) return {};
    if (sum > cfg.latency_threshold_s) return {Point::Hit, sum};
    return {Point::Miss};
  });

  std::vector<Alert> alerts;
  for (const auto& run : runs) {
    const auto w = buckets.size() > 1 ? buckets[1].bucket_start - buckets[0].bucket_start : kMinute;
    const auto from = buckets[run.first].bucket_start;
    const auto to = buckets[run.last].bucket_start + w;
    auto alert = window_alert(rules::kLatency, std::to_string(from), from, to, {ThreatCode::N2},
                              "latency_sum", {},
                              format("Processing latency up to %.2f s (threshold %.2f s)", run.peak,
                                     cfg.latency_threshold_s));
    alert.raised_at = from + w;
    alerts.push_back(std::move(alert));
  }
  return alerts;
}

std::vector<Alert> rule_link_deviation(const std::string& source, const std::string& target,
                                       std::span<const LinkEvaluation> evaluations,
                                       const RuleConfig& cfg) {
  auto runs = maximal_runs(evaluations.size(), [&](std::size_t i) -> Point {
    const double d = evaluations[i].deviation;
    if (std::abs(d) >= cfg.link_dev_threshold) return {Point::Hit, d};
    return {Point::Miss};
  });

  std::vector<Alert> alerts;
  for (const auto& run : runs) {
    if (run.last - run.first + 1 < cfg.link_dev_sustain) continue;
    const auto first = evaluations[run.first].at;
    const auto last = evaluations[run.last].at;
    Alert alert;
    alert.rule = rules::kLinkDeviation;
    alert.alert_id = alert.rule + "-" + source + "-" + target + "-" + std::to_string(first);
    alert.raised_at = evaluations[run.first + cfg.link_dev_sustain - 1].at;
    alert.threat_codes = {ThreatCode::N1, ThreatCode::N2, ThreatCode::N3};
    alert.severity = AlertSeverity::Warning;
    alert.summary = "Gossip traffic " + source + " -> " + target +
                    format(" deviates from its baseline (peak %+.3f, threshold %.2f)", run.peak,
                           cfg.link_dev_threshold);
    alert.evidence = {LinkEvidence{source, target},
                      WindowEvidence{std::string(to_string(MetricSeries::GossipSent)),
                                     {{"source", source}, {"target", target}},
                                     first - kLinkCurrentWindow,
                                     last}};
    alerts.push_back(std::move(alert));
  }
  return alerts;
}

namespace {

std::string_view source_name(SourceKind source) {
  switch (source) {
    case SourceKind::Blocks: return "blocks";
    case SourceKind::Metrics: return "metrics";
    case SourceKind::Logs: return "logs";
    case SourceKind::Scans: return "scans";
    case SourceKind::Issues: return "issues";
  }
  return "?";
}

std::vector<ThreatCode> codes_for_task(std::string_view task) {
  for (const auto& binding : task_bindings()) {
    if (task == binding.task) return binding.codes;
  }
  return {};
}

}  // namespace

Alert parse_error_alert(SourceKind source, std::uint64_t line, const std::string& raw,
                        const std::string& message, TimestampMs detected_at) {
  // The task that reads the damaged stream decides which threats a gap in it can hide.
  const char* task = "T6";
  switch (source) {
    case SourceKind::Blocks: task = "T6"; break;
    case SourceKind::Metrics: task = "T4"; break;
    case SourceKind::Logs: task = "T3"; break;
    case SourceKind::Scans: task = "T1"; break;
    case SourceKind::Issues: task = "T2"; break;
  }
  constexpr std::size_t kMaxRaw = 200;
  Alert alert;
  alert.rule = rules::kIngestParseError;
  alert.alert_id =
      alert.rule + ":" + std::string(source_name(source)) + ":" + std::to_string(line);
  alert.raised_at = detected_at;
  alert.threat_codes = codes_for_task(task);
  alert.severity = AlertSeverity::Warning;
  alert.summary = "Skipped malformed " + std::string(source_name(source)) + " line " +
                  std::to_string(line) + ": " + message + " [" +
                  (raw.size() > kMaxRaw ? raw.substr(0, kMaxRaw) + "..." : raw) + "]";
  alert.evidence = {WindowEvidence{"ingest:" + std::string(source_name(source)),
                                   {{"line", std::to_string(line)}},
                                   detected_at,
                                   detected_at + 1}};
  return alert;
}

Alert stream_violation_alert(const std::vector<StreamViolation>& violations,
                             TimestampMs detected_at) {
  Alert alert;
  alert.rule = rules::kStreamViolation;
  const auto first = violations.empty() ? 0 : violations.front().block_number;
  alert.alert_id = alert.rule + ":" + std::to_string(first);
  alert.raised_at = detected_at;
  alert.threat_codes = codes_for_task("T6");
  alert.severity = AlertSeverity::Warning;
  alert.summary = "Block stream rejected at block " + std::to_string(first);
  for (const auto& v : violations) {
    alert.summary += "; " + std::string(to_string(v.kind)) + ": " + v.detail;
    alert.evidence.push_back(BlockEvidence{v.block_number});
  }
  if (alert.evidence.empty()) alert.evidence.push_back(BlockEvidence{first});
  return alert;
}

const std::vector<TaskBinding>& task_bindings() {
  using enum ThreatCode;
  static const std::vector<TaskBinding> bindings = {
      {"T1", "Identify vulnerable smart contracts", {SC1, SC2, SC3}, {rules::kScanFindings}},
      {"T2", "Identify blockchain framework vulnerabilities", {SC4, AC2}, {}},
      {"T3", "Inspect log files of running services", {SC4, N1, N3, C3, C4}, {}},
      {"T4", "Review networking activity", {N1, N2, N3}, {rules::kLinkDeviation}},
      {"T5", "Compare transaction metrics over time", {N2, C2},
       {rules::kTxFlood, rules::kTxSize, rules::kLatency}},
      {"T6", "Explore block and transaction history", {SC1, SC2, C3, AC1},
       {rules::kStreamViolation}},
      {"T7", "Review configuration changes", {C1, AC1}, {rules::kConfigChange}},
      {"T8", "Detect identity abuse", {AC1, AC3, AC4}, {}},
  };
  return bindings;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<Alert> compute_alerts(const Store& store, const RuleConfig& cfg, TimestampMs now) {
  std::vector<Alert> alerts;
  auto add = [&alerts](std::vector<Alert> more) {
    std::move(more.begin(), more.end(), std::back_inserter(alerts));
  };

  TxFilter config_filter;
  config_filter.to = now;
  config_filter.tx_type = TxType::Config;
  for (const auto& tx : store.query_transactions(config_filter)) {
    if (auto alert = rule_config_change(tx)) alerts.push_back(std::move(*alert));
  }

  for (const auto& report : store.scans()) {
    if (report.scanned_at >= now) continue;
    if (auto alert = rule_scan_findings(report)) alerts.push_back(std::move(*alert));
  }

  // A minute is complete once a later event of the same stream has been stored.
  const auto now_minute = align_down(now, kMinute);
  if (auto first_tx = store.first_transaction_time()) {
    const auto last_block = store.latest_timestamp(StreamKind::Blocks).value_or(*first_tx);
    const auto from = align_down(*first_tx, kMinute);
    const auto to = std::min(align_down(last_block, kMinute), now_minute);
    if (to > from) {
      TxFilter filter;
      filter.from = from;
      filter.to = to;
      const auto txs = store.query_transactions(filter);
      const auto buckets = bucket_transactions(txs, Granularity::Min1, from, to);
      add(rule_tx_flood(buckets, cfg));
      add(rule_tx_size(buckets, cfg));
    }
  }

  if (auto last_metric = store.latest_timestamp(StreamKind::Metrics)) {
    const auto watermark = std::min(align_down(*last_metric, kMinute), now_minute);

    std::optional<TimestampMs> first_latency;
    for (auto series : kLatencySeries) {
      if (auto t = store.first_sample_time(series)) {
        first_latency = std::min(first_latency.value_or(*t), *t);
      }
    }
    if (first_latency && watermark > align_down(*first_latency, kMinute)) {
      add(rule_latency(
          latency_series(store, align_down(*first_latency, kMinute), watermark, Granularity::Min1),
          cfg));
    }

    for (const auto& labels : store.label_sets(MetricSeries::GossipSent)) {
      auto source = labels.find("source");
      auto target = labels.find("target");
      if (source == labels.end() || target == labels.end()) continue;
      const auto first = store.first_sample_time(MetricSeries::GossipSent, labels);
      if (!first) continue;
      // Earlier instants are cold starts with deviation 0 by definition.
      std::vector<LinkEvaluation> evaluations;
      for (auto t = align_up(*first + kLinkCurrentWindow + kLinkMinHistory, kMinute);
           t <= watermark; t += kMinute) {
        evaluations.push_back({t, link_stats(store, source->second, target->second, t).deviation});
      }
      add(rule_link_deviation(source->second, target->second, evaluations, cfg));
    }
  }

  std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    return std::tie(a.raised_at, a.alert_id) < std::tie(b.raised_at, b.alert_id);
  });
  return alerts;
}

Evaluation evaluate(Store& store, const RuleConfig& cfg, TimestampMs now) {
  static std::mutex single_flight;
  std::lock_guard lock(single_flight);

  Evaluation result;
  for (auto& alert : compute_alerts(store, cfg, now)) {
    auto existing = store.alert(alert.alert_id);
    if (!existing) {
      result.raised.push_back(std::move(alert));
    } else if (*existing != alert) {
      result.superseded.push_back(std::move(alert));
    }
  }
  if (!result.raised.empty()) {
    store.append(std::vector<Event>(result.raised.begin(), result.raised.end()));
  }
  for (const auto& alert : result.superseded) store.supersede_alert(alert);
  return result;
}

std::vector<Alert> evaluate_all(Store& store, const RuleConfig& cfg, TimestampMs now) {
  return evaluate(store, cfg, now).raised;
}

}  // namespace ledgerwatch
