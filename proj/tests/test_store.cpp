// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/store.hpp"
#include "oracle/oracle.hpp"
#include "support/support.hpp"

using namespace ledgerwatch;

namespace {

std::vector<Event> as_events(const sim::EventTrace& trace) {
  std::vector<Event> events;
  for (const auto& b : trace.blocks) events.emplace_back(b);
  for (const auto& m : trace.metrics) events.emplace_back(m);
  for (const auto& l : trace.logs) events.emplace_back(l);
  for (const auto& c : trace.chaincodes) events.emplace_back(c);
  for (const auto& i : trace.issues) events.emplace_back(i);
  return events;
}

Alert sample_alert(const std::string& id, TimestampMs at) {
  return Alert{id, at, "tx_flood", {ThreatCode::N2}, AlertSeverity::Warning, "s",
               {WindowEvidence{"tx_count", {}, at, at + kMinute}}};
}

// Everything a reader can observe, in a comparable form.
json snapshot(const Store& s) {
  json j;
  j["seq"] = s.sequence();
  j["tx"] = s.query_transactions({}).size();
  const auto chain = s.chain();
  j["height"] = chain ? chain->height : 0;
  j["hash"] = chain ? chain->last_hash : "";
  j["logs"] = json::array();
  for (const auto& l : s.query_logs({std::nullopt, LogLevel::Debug, 0, INT64_MAX, kMaxLogLimit})) {
    j["logs"].push_back(to_line(l));
  }
  j["links"] = json::array();
  for (const auto& labels : s.label_sets(MetricSeries::GossipSent)) {
    j["links"].push_back({labels, s.sum_metric(MetricSeries::GossipSent, labels, 0, INT64_MAX)});
  }
  j["chaincodes"] = s.chaincodes().size();
  j["issues"] = s.issues().size();
  j["alerts"] = json::array();
  for (const auto& a : s.alerts()) j["alerts"].push_back(to_line(a));
  return j;
}

}  // namespace

TEST_CASE("block append, duplicate and gap") {
  Store store;
  auto chain = lwtest::make_chain(0, 4);
  const auto before = store.sequence();
  store.append({chain[0], chain[1], chain[2]});
  CHECK(store.sequence() == before + 3);
  CHECK(store.chain()->height == 3);
  CHECK(store.has_block(2));
  CHECK(store.has_transaction("tx-1-0"));

  try {
    store.append({chain[2]});
    FAIL("expected duplicate");
  } catch (const StoreError& e) {
    CHECK(e.code() == StoreError::Code::DuplicateEvent);
  }

  auto later = lwtest::make_chain(5, 1, 2, chain[3].data_hash);
  try {
    store.append({later[0]});
    FAIL("expected gap");
  } catch (const StoreError& e) {
    CHECK(e.code() == StoreError::Code::ValidationFailed);
    REQUIRE(!e.violations().empty());
    CHECK(e.violations()[0].kind == ViolationKind::Gap);
  }
  CHECK(store.chain()->height == 3);

  // A failing batch stores nothing.
  auto bad = chain[3];
  bad.prev_hash = "nope";
  CHECK_THROWS_AS(store.append({lwtest::gossip(1, "a", "b", 1), bad}), StoreError);
  CHECK(store.label_sets(MetricSeries::GossipSent).empty());
  store.append({chain[3]});
  CHECK(store.chain()->height == 4);
}

TEST_CASE("other duplicates and invalid events") {
  Store store;
  const auto s = lwtest::gossip(100, "a", "b", 3);
  store.append({s});
  CHECK(store.has_sample(s));
  CHECK_THROWS_AS(store.append({s}), StoreError);
  CHECK_THROWS_AS(store.append({lwtest::gossip(200, "a", "b", -1)}), StoreError);
  store.append({sample_alert("x", 5)});
  CHECK_THROWS_AS(store.append({sample_alert("x", 6)}), StoreError);
  auto bad = sample_alert("y", 5);
  bad.evidence.clear();
  CHECK_THROWS_AS(store.append({bad}), StoreError);
  store.append({Issue{"FAB-1", "t", IssuePriority::High, "Open", 1, ""}});
  CHECK_THROWS_AS(store.append({Issue{"FAB-1", "t", IssuePriority::High, "Open", 2, ""}}), StoreError);
}

TEST_CASE("transaction queries") {
  Store store;
  const auto trace = sim::simulate(sim::make_network(2, 2, 42),
                                   {sim::parse_scenario("sc2_vuln_chaincode", kHour)}, kHour, 2.0);
  for (const auto& b : trace.blocks) store.append({b});
  CHECK(store.query_transactions({}).size() == trace.transaction_count());
  CHECK(store.transaction_count() == trace.transaction_count());

  TxFilter vuln;
  vuln.chaincode = "vulncc";
  CHECK(store.query_transactions(vuln).size() == sim::kExploitBurst);

  TxFilter empty;
  empty.from = empty.to = trace.start + 10 * kMinute;
  CHECK(store.query_transactions(empty).empty());

  TxFilter reversed;
  reversed.from = 10;
  reversed.to = 5;
  CHECK_THROWS_AS(store.query_transactions(reversed), InvalidRange);

  const auto all = store.query_transactions({});
  CHECK(std::is_sorted(all.begin(), all.end(), [](const Transaction& a, const Transaction& b) {
    return std::tie(a.block_num, a.tx_index) < std::tie(b.block_num, b.tx_index);
  }));
}

TEST_CASE("query results match a brute-force scan of the raw files") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 6; ++round) {
    lwtest::TempDir dir;
    const auto length = (10 + rng() % 20) * kMinute;
    const auto trace = lwtest::write_scenario_trace(dir.path(), {"sc2_vuln_chaincode", "n2_link_dos"},
                                                    length, 1.0 + (rng() % 3), rng());
    const auto raw = oracle::load(dir.path());
    Store store(dir.path());
    CHECK(store.load_warnings().empty());

    for (int q = 0; q < 20; ++q) {
      oracle::TxQuery query;
      query.from = trace.start + static_cast<TimestampMs>(rng() % length);
      query.to = query.from + static_cast<TimestampMs>(rng() % (length / 2));
      if (rng() % 2) query.msp = rng() % 2 ? "Org1MSP" : "Org2MSP";
      if (rng() % 3 == 0) query.chaincode = rng() % 2 ? "vulncc" : "assetcc";
      TxFilter filter{query.from, query.to, query.chaincode, query.msp, std::nullopt};
      const auto got = store.query_transactions(filter);
      const auto want = oracle::filter(raw, query);
      REQUIRE(got.size() == want.size());
      std::set<std::string> want_ids;
      for (const auto& tx : want) want_ids.insert(tx.tx_id);
      for (const auto& tx : got) CHECK(want_ids.contains(tx.tx_id));
    }

    // Gossip samples for the attacked link are exactly the emitted ones.
    const auto [src, dst] = sim::dos_target_link(trace.network);
    const auto samples =
        store.query_metrics(MetricSeries::GossipSent, {{"source", src}, {"target", dst}}, 0, INT64_MAX);
    std::size_t want = 0;
    double want_sum = 0;
    for (const auto& s : raw.samples) {
      if (s.series == "GOSSIP_SENT" && s.source == src && s.target == dst) {
        ++want;
        want_sum += s.value;
      }
    }
    CHECK(samples.size() == want);
    CHECK(oracle::close(store.sum_metric(MetricSeries::GossipSent, {{"source", src}, {"target", dst}},
                                         0, INT64_MAX),
                        want_sum));
    CHECK(store.query_metrics(MetricSeries::GossipSent, {{"source", "nobody"}}, 0, INT64_MAX).empty());
  }
}

TEST_CASE("log queries") {
  Store store;
  const auto trace = sim::simulate(sim::make_network(2, 2, 3), {}, 30 * kMinute, 2.0);
  std::vector<Event> logs(trace.logs.begin(), trace.logs.end());
  store.append(logs);

  const auto errors = store.query_logs({std::nullopt, LogLevel::Error, 0, INT64_MAX, kMaxLogLimit});
  for (const auto& l : errors) CHECK(l.level == LogLevel::Error);
  CHECK(store.query_logs({std::nullopt, LogLevel::Debug, 0, INT64_MAX, 5}).size() <= 5);

  const auto node = trace.logs.front().node;
  const auto mine = store.query_logs({node, LogLevel::Debug, 0, INT64_MAX, kMaxLogLimit});
  CHECK_FALSE(mine.empty());
  for (const auto& l : mine) CHECK(l.node == node);

  const auto all = store.query_logs({std::nullopt, LogLevel::Debug, 0, INT64_MAX, kMaxLogLimit});
  CHECK(std::is_sorted(all.begin(), all.end(),
                       [](const LogLine& a, const LogLine& b) { return a.timestamp > b.timestamp; }));
  CHECK_THROWS_AS(store.query_logs({std::nullopt, LogLevel::Debug, 10, 5, 10}), InvalidRange);
}

TEST_CASE("reopening replays the persisted log") {
  lwtest::TempDir dir;
  const auto trace = sim::simulate(sim::make_network(2, 2, 8),
                                   {sim::parse_scenario("sc2_vuln_chaincode", 30 * kMinute)},
                                   30 * kMinute, 2.0);
  const auto events = as_events(trace);
  const auto half = events.size() / 2;

  Store reference;
  reference.append(events);
  reference.append({sample_alert("a1", trace.start)});

  {
    Store first(dir / "store");
    first.append(std::vector<Event>(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(half)));
    first.save_cursor("BLOCKS x", {10, 2, 99});
  }
  {
    Store second(dir / "store");
    CHECK(second.load_warnings().empty());
    CHECK(second.cursor("BLOCKS x") == Cursor{10, 2, 99});
    second.append(std::vector<Event>(events.begin() + static_cast<std::ptrdiff_t>(half), events.end()));
    second.append({sample_alert("a1", trace.start)});
    CHECK(snapshot(second) == snapshot(reference));
  }
  Store third(dir / "store");
  CHECK(third.load_warnings().empty());
  CHECK(snapshot(third) == snapshot(reference));
}

TEST_CASE("superseded alerts survive a restart") {
  lwtest::TempDir dir;
  auto alert = sample_alert("flood-1", 1000);
  {
    Store store(dir.path());
    store.append({alert});
    alert.evidence = {WindowEvidence{"tx_count", {}, 1000, 1000 + 5 * kMinute}};
    store.supersede_alert(alert);
    CHECK(store.alert("flood-1") == alert);
    CHECK_THROWS_AS(store.supersede_alert(sample_alert("missing", 1)), StoreError);
  }
  Store reopened(dir.path());
  REQUIRE(reopened.alerts().size() == 1);
  CHECK(reopened.alerts()[0] == alert);
}

TEST_CASE("unparseable lines become load warnings") {
  lwtest::TempDir dir;
  auto chain = lwtest::make_chain(0, 2);
  lwtest::write_file(dir / kBlocksFile, to_line(chain[0]) + "\n{broken\n" + to_line(chain[1]) + "\n");
  lwtest::write_file(dir / kCursorsFile, "not json");
  Store store(dir.path());
  CHECK(store.chain()->height == 2);
  REQUIRE(store.load_warnings().size() == 2);
  CHECK(store.load_warnings()[0].find("blocks.jsonl:2") == 0);
}

TEST_CASE("alert listeners see each new alert once") {
  Store store;
  std::vector<std::string> seen;
  store.on_alert([&](const Alert& a) { seen.push_back(a.alert_id); });
  store.append({sample_alert("a", 1), sample_alert("b", 2)});
  auto changed = sample_alert("a", 1);
  changed.summary = "grown";
  store.supersede_alert(changed);
  CHECK(seen == std::vector<std::string>{"a", "b"});
  CHECK(store.alert("a")->summary == "grown");
}

TEST_CASE("readers observe whole batches while a writer appends") {
  Store store;
  auto chain = lwtest::make_chain(0, 400, 3);
  std::atomic<bool> done{false};
  std::atomic<int> torn{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      while (!done) {
        const auto n = store.query_transactions({}).size();
        if (n % 6 != 0) ++torn;
        const auto tip = store.chain();
        if (tip && tip->height % 2 != 0) ++torn;
      }
    });
  }
  for (std::size_t i = 0; i < chain.size(); i += 2) store.append({chain[i], chain[i + 1]});
  done = true;
  for (auto& t : readers) t.join();
  CHECK(torn == 0);
  CHECK(store.transaction_count() == 1200);
}
