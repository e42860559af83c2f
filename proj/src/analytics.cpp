// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/analytics.hpp"

#include <algorithm>
#include <set>

#include "ledgerwatch/util.hpp"

namespace ledgerwatch {

DurationMs width(Granularity g) {
  switch (g) {
    case Granularity::Min1: return kMinute;
    case Granularity::Hour1: return kHour;
    case Granularity::Hour12: return 12 * kHour;
    case Granularity::Hour24: return kDay;
  }
  return kMinute;
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::Min1: return "1m";
    case Granularity::Hour1: return "1h";
    case Granularity::Hour12: return "12h";
    case Granularity::Hour24: return "24h";
  }
  return "?";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  for (auto g : {Granularity::Min1, Granularity::Hour1, Granularity::Hour12, Granularity::Hour24}) {
    if (text == to_string(g)) return g;
  }
  return std::nullopt;
}

std::vector<TxBucket> bucket_transactions(std::span<const Transaction> txs, Granularity g,
                                          TimestampMs from, TimestampMs to) {
  if (from > to) throw InvalidRange("from must not exceed to");
  const auto w = width(g);
  const auto first = align_down(from, w);
  const auto last = align_up(to, w);
  std::vector<TxBucket> buckets(static_cast<std::size_t>((last - first) / w));
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    buckets[i].bucket_start = first + static_cast<TimestampMs>(i) * w;
  }

  std::vector<std::map<MspId, std::uint64_t>> bytes(buckets.size());
  for (const auto& tx : txs) {
    if (tx.timestamp < from || tx.timestamp >= to) continue;
    const auto i = static_cast<std::size_t>((tx.timestamp - first) / w);
    ++buckets[i].counts_by_msp[tx.creator_msp];
    ++buckets[i].total;
    bytes[i][tx.creator_msp] += tx.size_bytes;
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    for (const auto& [msp, count] : buckets[i].counts_by_msp) {
      buckets[i].avg_size_by_msp[msp] =
          static_cast<double>(bytes[i][msp]) / static_cast<double>(count);
    }
  }
  return buckets;
}

double deviation_score(double current, double baseline) {
  const double sum = current + baseline;
  if (sum == 0.0) return 0.0;
  return (current - baseline) / sum;
}

LinkStats link_stats(const Store& store, const std::string& source, const std::string& target,
                     TimestampMs now) {
  const Labels labels{{"source", source}, {"target", target}};
  LinkStats stats{source, target, 0.0, 0.0, 0.0};
  const auto history_end = now - kLinkCurrentWindow;
  stats.current = store.sum_metric(MetricSeries::GossipSent, labels, history_end, now);

  const auto first = store.first_sample_time(MetricSeries::GossipSent, labels);
  const auto history_start = std::max(history_end - kLinkHistoryWindow, first.value_or(history_end));
  const auto covered = history_end - history_start;
  if (covered < kLinkMinHistory) {
    stats.baseline = stats.current;
    return stats;
  }
  const double hours = static_cast<double>(covered) / static_cast<double>(kHour);
  stats.baseline =
      store.sum_metric(MetricSeries::GossipSent, labels, history_start, history_end) / hours;
  stats.deviation = deviation_score(stats.current, stats.baseline);
  return stats;
}

std::vector<LatencyBucket> latency_series(const Store& store, TimestampMs from, TimestampMs to,
                                          Granularity g) {
  if (from > to) throw InvalidRange("from must not exceed to");
  const auto w = width(g);
  const auto first = align_down(from, w);
  const auto n = static_cast<std::size_t>((align_up(to, w) - first) / w);
  std::vector<LatencyBucket> buckets(n);
  for (std::size_t s = 0; s < std::size(kLatencySeries); ++s) {
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> counts(n, 0);
    for (const auto& sample : store.query_metrics(kLatencySeries[s], {}, from, to)) {
      const auto i = static_cast<std::size_t>((sample.timestamp - first) / w);
      sums[i] += sample.value;
      ++counts[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      buckets[i].bucket_start = first + static_cast<TimestampMs>(i) * w;
      if (counts[i] > 0) buckets[i].means[s] = sums[i] / static_cast<double>(counts[i]);
    }
  }
  return buckets;
}

NetworkGraph build_network_graph(const Store& store, const NetworkDescriptor& net,
                                 std::optional<TimestampMs> now) {
  NetworkGraph graph;
  graph.now = now.value_or(store.latest_timestamp(StreamKind::Metrics).value_or(0) + 1);

  std::set<std::string> local_ids;
  std::vector<NodeRef> foreign;
  for (const auto& node : network_nodes(net)) {
    if (node.local) {
      local_ids.insert(node.id);
      graph.nodes.push_back({node.id, node.msp, node.kind, true, false});
    } else {
      foreign.push_back(node);
    }
  }

  // Gossip endpoints missing from the descriptor are still local: only local nodes are scraped.
  const auto link_labels = store.label_sets(MetricSeries::GossipSent);
  for (const auto& labels : link_labels) {
    for (const char* end : {"source", "target"}) {
      auto it = labels.find(end);
      if (it != labels.end() && local_ids.insert(it->second).second) {
        graph.nodes.push_back({it->second, net.local_msp, NodeKind::Peer, true, false});
      }
    }
  }

  for (const auto& node : foreign) graph.nodes.push_back({node.id, node.msp, node.kind, false, false});
  graph.nodes.push_back({kBorderPeer, "", NodeKind::Peer, false, true});
  graph.nodes.push_back({kBorderOrderer, "", NodeKind::Orderer, false, true});

  for (const auto& labels : link_labels) {
    auto source = labels.find("source");
    auto target = labels.find("target");
    if (source == labels.end() || target == labels.end()) continue;
    const auto stats = link_stats(store, source->second, target->second, graph.now);
    graph.links.push_back(
        {stats.source, stats.target, true, stats.current, stats.baseline, stats.deviation});
  }
  for (const auto& node : foreign) {
    graph.links.push_back({node.id, node.kind == NodeKind::Peer ? kBorderPeer : kBorderOrderer,
                           false, std::nullopt, std::nullopt, 0.0});
  }
  return graph;
}

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const TxBucket& v) {
  j = json{{"bucket_start", v.bucket_start},
           {"counts_by_msp", v.counts_by_msp},
           {"total", v.total},
           {"avg_size_by_msp", v.avg_size_by_msp}};
}

void to_json(json& j, const LinkStats& v) {
  j = json{{"source", v.source},
           {"target", v.target},
           {"current", v.current},
           {"baseline", v.baseline},
           {"deviation", v.deviation}};
}

void to_json(json& j, const LatencyBucket& v) {
  j = json{{"bucket_start", v.bucket_start}};
  for (std::size_t s = 0; s < std::size(kLatencySeries); ++s) {
    std::string key(to_string(kLatencySeries[s]));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    j[key] = optional_number(v.means[s]);
  }
}

void to_json(json& j, const NetworkGraph& v) {
  json nodes = json::array();
  for (const auto& n : v.nodes) {
    nodes.push_back({{"id", n.id},
                     {"msp", n.border ? json(nullptr) : json(n.msp)},
                     {"kind", n.kind},
                     {"local", n.local},
                     {"border", n.border}});
  }
  json links = json::array();
  for (const auto& l : v.links) {
    links.push_back({{"source", l.source},
                     {"target", l.target},
                     {"local", l.local},
                     {"current", optional_number(l.current)},
                     {"baseline", optional_number(l.baseline)},
                     {"deviation", l.deviation}});
  }
  j = json{{"now", v.now}, {"nodes", std::move(nodes)}, {"links", std::move(links)}};
}

}  // namespace ledgerwatch
