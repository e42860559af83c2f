// SPDX-License-Identifier: Apache-2.0
//
// Read-side aggregation over the store: time buckets, latency series, link deviation
// and the node-link graph. Everything is recomputed on read.
#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerwatch/model.hpp"
#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/store.hpp"

namespace ledgerwatch {

enum class Granularity { Min1, Hour1, Hour12, Hour24 };

DurationMs width(Granularity g);
std::string_view to_string(Granularity g);  // "1m", "1h", "12h", "24h"
std::optional<Granularity> parse_granularity(std::string_view text);

struct TxBucket {
  TimestampMs bucket_start = 0;
  std::map<MspId, std::uint64_t> counts_by_msp;
  std::uint64_t total = 0;
  std::map<MspId, double> avg_size_by_msp;

  friend bool operator==(const TxBucket&, const TxBucket&) = default;
};

/// One bucket per granularity step from align_down(from) to align_up(to); only transactions
/// with timestamps in [from, to) are counted. Throws InvalidRange if from > to.
std::vector<TxBucket> bucket_transactions(std::span<const Transaction> txs, Granularity g,
                                          TimestampMs from, TimestampMs to);

/// (current - baseline) / (current + baseline), 0 when both are 0.
double deviation_score(double current, double baseline);

struct LinkStats {
  std::string source;
  std::string target;
  double current = 0.0;
  double baseline = 0.0;
  double deviation = 0.0;
};

inline constexpr DurationMs kLinkCurrentWindow = kHour;
inline constexpr DurationMs kLinkHistoryWindow = 168 * kHour;
/// Less history than this before now-1h counts as a cold start.
inline constexpr DurationMs kLinkMinHistory = 30 * kMinute;

LinkStats link_stats(const Store& store, const std::string& source, const std::string& target,
                     TimestampMs now);

struct LatencyBucket {
  TimestampMs bucket_start = 0;
  /// Means in kLatencySeries order; nullopt when the bucket has no samples.
  std::array<std::optional<double>, 3> means;

  friend bool operator==(const LatencyBucket&, const LatencyBucket&) = default;
};

std::vector<LatencyBucket> latency_series(const Store& store, TimestampMs from, TimestampMs to,
                                          Granularity g);

inline constexpr const char* kBorderPeer = "border-peer";
inline constexpr const char* kBorderOrderer = "border-orderer";

struct GraphNode {
  std::string id;
  MspId msp;  // empty for border nodes
  NodeKind kind = NodeKind::Peer;
  bool local = false;
  bool border = false;
};

struct GraphLink {
  std::string source;
  std::string target;
  bool local = false;
  std::optional<double> current;
  std::optional<double> baseline;
  double deviation = 0.0;
};

struct NetworkGraph {
  TimestampMs now = 0;
  std::vector<GraphNode> nodes;
  std::vector<GraphLink> links;
};

/// Local links come from the gossip series in the store; each foreign node hangs off the
/// border node of its kind. `now` defaults to one past the newest metric sample.
NetworkGraph build_network_graph(const Store& store, const NetworkDescriptor& net,
                                 std::optional<TimestampMs> now = std::nullopt);

void to_json(json& j, const TxBucket& v);
void to_json(json& j, const LinkStats& v);
void to_json(json& j, const LatencyBucket& v);
void to_json(json& j, const NetworkGraph& v);

}  // namespace ledgerwatch
