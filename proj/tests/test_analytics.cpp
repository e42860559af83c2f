// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "ledgerwatch/analytics.hpp"
#include "ledgerwatch/simulator.hpp"
#include "ledgerwatch/util.hpp"
#include "oracle/oracle.hpp"
#include "support/support.hpp"

using namespace ledgerwatch;

namespace {

constexpr TimestampMs T0 = sim::kTraceEpoch;

Transaction tx_at(TimestampMs t, const MspId& msp, std::uint64_t size = 1000) {
  Transaction tx;
  tx.tx_id = "t" + std::to_string(t) + msp;
  tx.timestamp = t;
  tx.creator_msp = msp;
  tx.chaincode = "cc";
  tx.size_bytes = size;
  return tx;
}

// One sample per minute of `per_minute` messages on link a->b over [from, to).
void fill_link(Store& store, TimestampMs from, TimestampMs to, double per_minute) {
  std::vector<Event> events;
  for (auto t = from; t < to; t += kMinute) events.emplace_back(lwtest::gossip(t, "a", "b", per_minute));
  store.append(events);
}

}  // namespace

TEST_CASE("granularity widths") {
  CHECK(width(Granularity::Min1) == 60'000);
  CHECK(width(Granularity::Hour1) == 3'600'000);
  CHECK(width(Granularity::Hour12) == 43'200'000);
  CHECK(width(Granularity::Hour24) == 86'400'000);
  for (const char* text : {"1m", "1h", "12h", "24h"}) {
    const auto g = parse_granularity(text);
    REQUIRE(g);
    CHECK(to_string(*g) == text);
  }
  CHECK_FALSE(parse_granularity("2h").has_value());
  CHECK_FALSE(parse_granularity("5m").has_value());
}

TEST_CASE("bucket examples") {
  const auto empty = bucket_transactions({}, Granularity::Min1, T0, T0 + 5 * kMinute);
  REQUIRE(empty.size() == 5);
  for (std::size_t i = 0; i < empty.size(); ++i) {
    CHECK(empty[i].bucket_start == T0 + static_cast<TimestampMs>(i) * kMinute);
    CHECK(empty[i].total == 0);
    CHECK(empty[i].counts_by_msp.empty());
  }

  std::vector<Transaction> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(tx_at(T0 + 2 * kMinute + i * 1000, i < 6 ? "A" : "B", 100 * (i + 1)));
  const auto b = bucket_transactions(ten, Granularity::Min1, T0, T0 + 5 * kMinute);
  REQUIRE(b.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(b[i].total == (i == 2 ? 10u : 0u));
  CHECK(b[2].counts_by_msp.at("A") == 6);
  CHECK(b[2].counts_by_msp.at("B") == 4);
  CHECK(b[2].avg_size_by_msp.at("A") == doctest::Approx(350.0));
  CHECK(b[2].avg_size_by_msp.at("B") == doctest::Approx(850.0));

  // Unaligned range: buckets cover the aligned hull, counts only the range.
  const auto partial = bucket_transactions(ten, Granularity::Min1, T0 + 2 * kMinute + 3500,
                                           T0 + 2 * kMinute + 7500);
  REQUIRE(partial.size() == 1);
  CHECK(partial[0].bucket_start == T0 + 2 * kMinute);
  CHECK(partial[0].total == 4);

  CHECK(bucket_transactions(ten, Granularity::Hour1, T0, T0).empty());
  CHECK_THROWS_AS(bucket_transactions(ten, Granularity::Min1, T0 + 1, T0), InvalidRange);
}

TEST_CASE("bucket totals conserve the transactions in range") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<Transaction> txs;
    const int n = static_cast<int>(rng() % 300);
    for (int i = 0; i < n; ++i) {
      txs.push_back(tx_at(T0 + static_cast<TimestampMs>(rng() % (3 * kDay)), rng() % 2 ? "A" : "B"));
    }
    const TimestampMs from = T0 + static_cast<TimestampMs>(rng() % kDay);
    const TimestampMs to = from + static_cast<TimestampMs>(rng() % (2 * kDay));
    const std::size_t in_range = std::count_if(txs.begin(), txs.end(), [&](const Transaction& t) {
      return t.timestamp >= from && t.timestamp < to;
    });
    for (auto g : {Granularity::Min1, Granularity::Hour1, Granularity::Hour12, Granularity::Hour24}) {
      const auto buckets = bucket_transactions(txs, g, from, to);
      std::uint64_t total = 0;
      for (const auto& b : buckets) {
        std::uint64_t per_msp = 0;
        for (const auto& [msp, c] : b.counts_by_msp) per_msp += c;
        CHECK(per_msp == b.total);
        CHECK(b.bucket_start % width(g) == 0);
        total += b.total;
      }
      CHECK(total == in_range);
      if (from != to) {
        CHECK(buckets.front().bucket_start <= from);
        CHECK(buckets.back().bucket_start + width(g) >= to);
      }
    }
  }
}

TEST_CASE("deviation score examples") {
  CHECK(deviation_score(100, 100) == 0.0);
  CHECK(deviation_score(300, 100) == doctest::Approx(0.5));
  CHECK(deviation_score(0, 100) == -1.0);
  CHECK(deviation_score(100, 0) == 1.0);
  CHECK(deviation_score(0, 0) == 0.0);
}

TEST_CASE("deviation score properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> value(0.0, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double c = value(rng);
    const double b = rng() % 10 == 0 ? c : value(rng);
    const double d = deviation_score(c, b);
    CHECK(d >= -1.0);
    CHECK(d <= 1.0);
    CHECK(deviation_score(b, c) == -d);
    CHECK((d == 0.0) == (c == b));
    CHECK(deviation_score(c + 1.0, b) > d);
    CHECK(deviation_score(c, b + 1.0) < d);
  }
}

TEST_CASE("link stats fixtures") {
  SUBCASE("steady 60 per hour for 8 days") {
    Store store;
    fill_link(store, T0, T0 + 8 * kDay, 1.0);
    const auto s = link_stats(store, "a", "b", T0 + 8 * kDay);
    CHECK(s.current == doctest::Approx(60.0));
    CHECK(s.baseline == doctest::Approx(60.0));
    CHECK(std::abs(s.deviation) <= 1e-9);
  }
  SUBCASE("final hour at ten times the baseline") {
    Store store;
    fill_link(store, T0, T0 + 8 * kDay - kHour, 1.0);
    fill_link(store, T0 + 8 * kDay - kHour, T0 + 8 * kDay, 10.0);
    const auto s = link_stats(store, "a", "b", T0 + 8 * kDay);
    CHECK(s.current == doctest::Approx(600.0));
    CHECK(s.baseline == doctest::Approx(60.0));
    CHECK(std::abs(s.deviation - 540.0 / 660.0) <= 1e-9);
    CHECK(std::abs(s.deviation - 0.8181818181818182) <= 1e-9);
  }
  SUBCASE("fresh store with thirty minutes of data") {
    Store store;
    fill_link(store, T0, T0 + 30 * kMinute, 5.0);
    const auto s = link_stats(store, "a", "b", T0 + 30 * kMinute);
    CHECK(s.deviation == 0.0);
  }
  SUBCASE("unknown link") {
    Store store;
    const auto s = link_stats(store, "x", "y", T0);
    CHECK(s.current == 0.0);
    CHECK(s.deviation == 0.0);
  }
}

TEST_CASE("latency series") {
  Store store;
  std::vector<Event> events;
  for (auto t = T0; t < T0 + 10 * kMinute; t += 15 * kSecond) {
    if (t >= T0 + 4 * kMinute && t < T0 + 5 * kMinute) continue;
    events.emplace_back(MetricSample{t, MetricSeries::OrderingLatency, {}, 0.8});
  }
  store.append(events);
  const auto series = latency_series(store, T0, T0 + 10 * kMinute, Granularity::Min1);
  REQUIRE(series.size() == 10);
  for (std::size_t i = 0; i < series.size(); ++i) {
    CHECK_FALSE(series[i].means[0].has_value());
    CHECK_FALSE(series[i].means[2].has_value());
    if (i == 4) {
      CHECK_FALSE(series[i].means[1].has_value());
    } else {
      REQUIRE(series[i].means[1].has_value());
      CHECK(*series[i].means[1] == doctest::Approx(0.8));
    }
  }
  const auto j = json(series[4]);
  CHECK(j["ordering_latency"].is_null());
  CHECK(json(series[3])["ordering_latency"] == doctest::Approx(0.8));
}

TEST_CASE("flood raises ordering latency above the pre-attack level") {
  const auto trace = sim::simulate(sim::make_network(2, 2, 42),
                                   {sim::parse_scenario("n2_tx_flood@30m+10m*50", kHour)}, kHour, 2.0);
  Store store;
  std::vector<Event> events(trace.metrics.begin(), trace.metrics.end());
  store.append(events);
  const auto pre = latency_series(store, T0, T0 + 30 * kMinute, Granularity::Min1);
  const auto during = latency_series(store, T0 + 32 * kMinute, T0 + 40 * kMinute, Granularity::Min1);
  double pre_max = 0;
  for (const auto& b : pre) pre_max = std::max(pre_max, b.means[1].value_or(0));
  double during_max = 0;
  for (const auto& b : during) during_max = std::max(during_max, b.means[1].value_or(0));
  CHECK(during_max > 2 * pre_max);
}

TEST_CASE("network graph of a two-organization descriptor") {
  const auto net = sim::make_network(2, 2, 42);
  Store store;
  auto graph = build_network_graph(store, net, T0);
  std::size_t local = 0, foreign = 0, border = 0;
  for (const auto& n : graph.nodes) {
    if (n.border) {
      ++border;
    } else if (n.local) {
      ++local;
    } else {
      ++foreign;
    }
  }
  CHECK(local == 3);
  CHECK(foreign == 3);
  CHECK(border == 2);
  for (const auto& l : graph.links) {
    if (!l.local) {
      CHECK(l.deviation == 0.0);
      CHECK_FALSE(l.current.has_value());
      CHECK((l.target == kBorderPeer || l.target == kBorderOrderer));
    }
  }
  const auto j = json(graph);
  CHECK(j["nodes"].size() == 8);
}

TEST_CASE("link DoS peak singles out the attacked link") {
  const auto net = sim::make_network(2, 2, 42);
  const auto trace = sim::simulate(net, {sim::parse_scenario("n2_link_dos", 2 * kHour)}, 2 * kHour, 2.0);
  Store store;
  std::vector<Event> events(trace.metrics.begin(), trace.metrics.end());
  store.append(events);
  const auto [src, dst] = sim::dos_target_link(net);
  const auto graph = build_network_graph(store, net);
  CHECK(graph.now == trace.metrics.back().timestamp + 1);
  std::size_t local_links = 0;
  bool found = false;
  for (const auto& l : graph.links) {
    if (!l.local) continue;
    ++local_links;
    if (l.source == src && l.target == dst) {
      found = true;
      CHECK(std::abs(l.deviation) >= 0.8);
    } else {
      CHECK(std::abs(l.deviation) < 0.3);
    }
  }
  CHECK(found);
  CHECK(local_links == 6);
}

TEST_CASE("graph matches the brute-force shape and link statistics") {
  lwtest::TempDir dir;
  const auto trace = lwtest::write_scenario_trace(dir.path(), {"n2_link_dos"}, 2 * kHour, 1.0, 7, 3, 2);
  const auto raw = oracle::load(dir.path());
  Store store(dir.path());
  const auto now = T0 + 100 * kMinute + 7;
  const auto graph = build_network_graph(store, trace.network, now);
  const auto shape = oracle::graph_shape(raw);
  std::size_t local = 0, foreign = 0;
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto& n : graph.nodes) {
    if (!n.border) (n.local ? local : foreign)++;
  }
  CHECK(local == shape.local_nodes);
  CHECK(foreign == shape.foreign_nodes);
  for (const auto& l : graph.links) {
    if (!l.local) continue;
    links.emplace_back(l.source, l.target);
    const auto want = oracle::link(raw, l.source, l.target, now);
    CHECK(oracle::close(*l.current, want.current));
    CHECK(oracle::close(*l.baseline, want.baseline));
    CHECK(oracle::close(l.deviation, want.deviation));
  }
  std::sort(links.begin(), links.end());
  CHECK(links == shape.local_links);
  CHECK(graph.links.size() == shape.local_links.size() + shape.foreign_nodes);
}
