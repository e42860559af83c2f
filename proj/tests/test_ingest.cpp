// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "ledgerwatch/ingest.hpp"
#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/simulator.hpp"
#include "support/support.hpp"

using namespace ledgerwatch;

namespace {

std::string block_lines(const std::vector<Block>& blocks) {
  std::string text;
  for (const auto& b : blocks) text += to_line(b) + "\n";
  return text;
}

Issue issue(const std::string& id, IssuePriority p, TimestampMs updated) {
  return {id, "title " + id, p, "Open", updated, ""};
}

}  // namespace

TEST_CASE("file source reads complete lines after the cursor") {
  lwtest::TempDir dir;
  const auto chain = lwtest::make_chain(0, 3);
  lwtest::write_file(dir / kBlocksFile, block_lines(chain));
  const SourceDescriptor src{SourceKind::Blocks, dir.path().string()};

  const auto first = ingest_once(src, {});
  REQUIRE(first.events.size() == 3);
  CHECK(std::get<Block>(first.events[2]) == chain[2]);
  CHECK(first.errors.empty());
  CHECK(first.cursor.offset == std::filesystem::file_size(dir / kBlocksFile));
  CHECK(first.cursor.line == 3);
  CHECK(first.cursor.last_timestamp == chain[2].timestamp);

  const auto again = ingest_once(src, first.cursor);
  CHECK(again.events.empty());
  CHECK(again.cursor == first.cursor);

  // Pointing at the file itself works too.
  const SourceDescriptor direct{SourceKind::Blocks, (dir / kBlocksFile).string()};
  CHECK(ingest_once(direct, {}).events.size() == 3);
}

TEST_CASE("malformed lines are reported and skipped") {
  lwtest::TempDir dir;
  const auto chain = lwtest::make_chain(0, 9);
  std::string text;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    text += to_line(chain[i]) + "\n";
    if (i == 4) text += "{\"number\": oops\n";
  }
  lwtest::write_file(dir / kBlocksFile, text);
  const auto batch = ingest_once({SourceKind::Blocks, dir.path().string()}, {});
  CHECK(batch.events.size() == 9);
  REQUIRE(batch.errors.size() == 1);
  CHECK(batch.errors[0].line == 6);
  CHECK(batch.errors[0].raw == "{\"number\": oops");

  // Valid JSON of the wrong shape and invalid samples are errors too.
  lwtest::write_file(dir / kMetricsFile,
                     to_line(lwtest::gossip(1, "a", "b", 2)) + "\n{\"x\":1}\n" +
                         to_line(lwtest::gossip(2, "a", "b", -3)) + "\n");
  const auto metrics = ingest_once({SourceKind::Metrics, dir.path().string()}, {});
  CHECK(metrics.events.size() == 1);
  CHECK(metrics.errors.size() == 2);
}

TEST_CASE("a partial trailing line waits for its newline") {
  lwtest::TempDir dir;
  const auto chain = lwtest::make_chain(0, 2);
  const auto second = to_line(chain[1]);
  lwtest::write_file(dir / kBlocksFile, to_line(chain[0]) + "\n" + second.substr(0, 20));
  const SourceDescriptor src{SourceKind::Blocks, dir.path().string()};
  const auto a = ingest_once(src, {});
  CHECK(a.events.size() == 1);
  CHECK(a.errors.empty());
  lwtest::append_file(dir / kBlocksFile, second.substr(20) + "\n");
  const auto b = ingest_once(src, a.cursor);
  REQUIRE(b.events.size() == 1);
  CHECK(std::get<Block>(b.events[0]) == chain[1]);
}

TEST_CASE("interleaved appends and polls yield the stream in order") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 10; ++round) {
    lwtest::TempDir dir;
    const auto chain = lwtest::make_chain(0, 40);
    const auto text = block_lines(chain);
    const SourceDescriptor src{SourceKind::Blocks, dir.path().string()};
    lwtest::write_file(dir / kBlocksFile, "");
    std::size_t written = 0;
    Cursor cursor;
    std::vector<std::uint64_t> seen;
    while (seen.size() < chain.size()) {
      if (written < text.size()) {
        const auto n = std::min<std::size_t>(text.size() - written, 1 + rng() % 700);
        lwtest::append_file(dir / kBlocksFile, text.substr(written, n));
        written += n;
      }
      const auto batch = ingest_once(src, cursor);
      REQUIRE(batch.errors.empty());
      CHECK(batch.cursor.offset >= cursor.offset);
      for (const auto& e : batch.events) seen.push_back(std::get<Block>(e).number);
      cursor = batch.cursor;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
  }
}

TEST_CASE("source errors") {
  lwtest::TempDir dir;
  try {
    ingest_once({SourceKind::Logs, (dir / "missing").string()}, {});
    FAIL("expected an error");
  } catch (const IngestError& e) {
    CHECK(e.code() == IngestError::Code::SourceUnavailable);
    CHECK(e.retryable());
  }
  lwtest::write_file(dir / kLogsFile, "");
  CHECK_THROWS_AS(ingest_once({SourceKind::Logs, dir.path().string()}, {100, 1, 0}), IngestError);
  try {
    ingest_once({SourceKind::Logs, dir.path().string(), 50}, {});
    FAIL("expected an error");
  } catch (const IngestError& e) {
    CHECK(e.code() == IngestError::Code::InvalidSource);
    CHECK_FALSE(e.retryable());
  }
  CHECK_FALSE(check_source({SourceKind::Blocks, "http://127.0.0.1:1/metrics"}).empty());
  CHECK(check_source({SourceKind::Metrics, "http://127.0.0.1:1/metrics"}).empty());
  Store scratch;
  CHECK_THROWS_AS(Collector(scratch, {SourceKind::Blocks, ""}), IngestError);
}

TEST_CASE("issue selection") {
  std::vector<Issue> feed{issue("FAB-1", IssuePriority::High, 10), issue("FAB-2", IssuePriority::Medium, 50),
                          issue("FAB-3", IssuePriority::Highest, 30), issue("FAB-4", IssuePriority::High, 20),
                          issue("FAB-5", IssuePriority::Medium, 40)};
  const auto picked = select_issues(feed);
  REQUIRE(picked.size() == 3);
  CHECK(picked[0].issue_id == "FAB-3");
  CHECK(picked[1].issue_id == "FAB-4");
  CHECK(picked[2].issue_id == "FAB-1");
  CHECK(select_issues({}).empty());

  const auto tied = select_issues({issue("FAB-9", IssuePriority::High, 5), issue("FAB-10", IssuePriority::High, 5)});
  CHECK(tied[0].issue_id == "FAB-10");

  lwtest::TempDir dir;
  std::string text;
  for (const auto& i : feed) text += to_line(i) + "\n";
  lwtest::write_file(dir / kIssuesFile, text);
  CHECK(fetch_issues({SourceKind::Issues, dir.path().string()}) == picked);
}

TEST_CASE("scan jobs number their reports") {
  Store store;
  const ChaincodeIR cc{"vulncc", {{"transfer", {{OpKind::Write, "k"}, {OpKind::Read, "k"}}}}};
  const auto a = run_scan_job(store, cc, 100);
  const auto b = run_scan_job(store, cc, 100);
  CHECK(a.report_id == "vulncc@100#1");
  CHECK(b.report_id == "vulncc@100#2");
  CHECK(store.scans("vulncc").size() == 2);
  CHECK(a.findings.size() == 1);
}

TEST_CASE("text exposition round trip") {
  std::vector<MetricSample> samples{
      lwtest::gossip(1000, "peer0.org1", "peer1.org1", 17),
      {1000, MetricSeries::OrderingLatency, {}, 0.123456789012345},
      {2000, MetricSeries::EndorsementDuration, {}, 0.25}};
  const auto text = to_exposition(samples);
  const auto parsed = parse_exposition("# scrape\n\n" + text);
  CHECK(parsed.errors.empty());
  CHECK(parsed.samples == samples);

  const auto bad = parse_exposition(
      "gossip_sent{source=\"a\"} 1 5\nunknown_metric 1 5\nordering_latency 0.5\nordering_latency x 5\n"
      "ORDERING_LATENCY 0.5 7\n");
  CHECK(bad.samples.size() == 1);
  CHECK(bad.errors.size() == 4);
  CHECK(bad.errors[1].line == 2);
}

TEST_CASE("metrics scrape over HTTP") {
  httplib::Server server;
  std::string body;
  std::mutex mutex;
  server.Get("/metrics", [&](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex);
    res.set_content(body, "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    std::lock_guard lock(mutex);
    body = "ordering_latency 0.5 1000\nordering_latency 0.7 2000\n";
  }
  const SourceDescriptor src{SourceKind::Metrics, "http://127.0.0.1:" + std::to_string(port) + "/metrics"};
  Store store;
  Collector collector(store, src);
  CHECK(collector.poll().stored == 2);
  {
    std::lock_guard lock(mutex);
    body += "ordering_latency 0.9 3000\n";
  }
  CHECK(collector.poll().stored == 1);
  CHECK(collector.poll().stored == 0);
  CHECK(store.query_metrics(MetricSeries::OrderingLatency, {}, 0, 10'000).size() == 3);
  CHECK(store.cursor(collector.cursor_key())->last_timestamp == 3000);

  server.stop();
  thread.join();
  try {
    collector.poll();
    FAIL("expected an error");
  } catch (const IngestError& e) {
    CHECK(e.code() == IngestError::Code::SourceUnavailable);
  }
}

TEST_CASE("collector stores events, warnings and scan jobs") {
  lwtest::TempDir dir;
  const auto trace = lwtest::write_scenario_trace(dir.path(), {"sc2_vuln_chaincode"}, 30 * kMinute);
  lwtest::append_file(dir / kLogsFile, "garbage\n");

  Store store;
  std::size_t warnings = 0;
  for (const auto& src : trace_sources(dir.path())) {
    Collector c(store, src);
    const auto r = c.poll();
    warnings += r.warnings.size();
    CHECK(c.poll().stored == 0);
  }
  CHECK(warnings == 1);
  CHECK(store.chain()->height == trace.blocks.size());
  CHECK(store.chaincodes().size() == trace.chaincodes.size());
  CHECK(store.scans().size() == trace.chaincodes.size());
  CHECK(store.scans("vulncc").size() == 1);
  CHECK(store.issues().size() == trace.issues.size());
  const auto alerts = store.alerts();
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].alert_id == "ingest_parse_error:logs:" + std::to_string(trace.logs.size() + 1));
}

TEST_CASE("collector skips duplicates and reports a broken chain once") {
  lwtest::TempDir dir;
  auto chain = lwtest::make_chain(0, 6);
  Store store;
  store.append({chain[0], chain[1]});
  auto broken = chain;
  broken[4].prev_hash = "forged";
  lwtest::write_file(dir / kBlocksFile, block_lines(broken));
  Collector c(store, {SourceKind::Blocks, dir.path().string()});
  const auto r = c.poll();
  CHECK(r.skipped == 2);
  CHECK(r.stored == 2);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].alert_id == "stream_violation:4");
  CHECK(store.chain()->height == 4);
  CHECK(store.alert("stream_violation:4").has_value());
}
