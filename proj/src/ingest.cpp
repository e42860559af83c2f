// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "httplib.h"
#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Blocks: return "BLOCKS";
    case SourceKind::Metrics: return "METRICS";
    case SourceKind::Logs: return "LOGS";
    case SourceKind::Scans: return "SCANS";
    case SourceKind::Issues: return "ISSUES";
  }
  return "?";
}

std::string_view source_file(SourceKind kind) {
  switch (kind) {
    case SourceKind::Blocks: return kBlocksFile;
    case SourceKind::Metrics: return kMetricsFile;
    case SourceKind::Logs: return kLogsFile;
    case SourceKind::Scans: return kChaincodesFile;
    case SourceKind::Issues: return kIssuesFile;
  }
  return "";
}

namespace {

bool is_http(std::string_view uri) { return uri.starts_with("http://"); }

std::filesystem::path file_path(const SourceDescriptor& src) {
  std::filesystem::path path(src.uri);
  if (path.extension() == ".jsonl") return path;
  return path / std::string(source_file(src.kind));
}

Event parse_event(SourceKind kind, const std::string& line) {
  const auto j = json::parse(line);
  switch (kind) {
    case SourceKind::Blocks: return j.get<Block>();
    case SourceKind::Metrics: {
      auto sample = j.get<MetricSample>();
      if (auto problem = check_sample(sample); !problem.empty()) {
        throw std::invalid_argument(problem);
      }
      return sample;
    }
    case SourceKind::Logs: return j.get<LogLine>();
    case SourceKind::Scans: return j.get<ChaincodeDeployment>();
    case SourceKind::Issues: return j.get<Issue>();
  }
  throw std::invalid_argument("unknown source kind");
}

TimestampMs event_time(const Event& event) {
  return std::visit(
      [](const auto& e) -> TimestampMs {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ScanReport>) {
          return e.scanned_at;
        } else if constexpr (std::is_same_v<T, Issue>) {
          return e.updated;
        } else if constexpr (std::is_same_v<T, Alert>) {
          return e.raised_at;
        } else {
          return e.timestamp;
        }
      },
      event);
}

IngestBatch ingest_file(const SourceDescriptor& src, const Cursor& cursor) {
  const auto path = file_path(src);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) {
    throw IngestError(IngestError::Code::SourceUnavailable, "cannot stat " + path.string());
  }
  if (size < cursor.offset) {
    throw IngestError(IngestError::Code::SourceUnavailable,
                      path.string() + " shrank below the stored cursor");
  }

  IngestBatch batch;
  batch.cursor = cursor;
  if (size == cursor.offset) return batch;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(IngestError::Code::SourceUnavailable, "cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(cursor.offset));
  std::string data(size - cursor.offset, '\0');
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  data.resize(static_cast<std::size_t>(in.gcount()));

  std::size_t pos = 0;
  while (true) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // partial line: wait for the writer
    std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    ++batch.cursor.line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      auto event = parse_event(src.kind, line);
      batch.cursor.last_timestamp = std::max(batch.cursor.last_timestamp, event_time(event));
      batch.events.push_back(std::move(event));
    } catch (const std::exception& e) {
      batch.errors.push_back({batch.cursor.line, std::move(line), e.what()});
    }
  }
  batch.cursor.offset = cursor.offset + pos;
  return batch;
}

IngestBatch ingest_http(const SourceDescriptor& src, const Cursor& cursor) {
  const std::string_view uri = src.uri;
  const auto path_start = uri.find('/', std::string_view("http://").size());
  const std::string origin(uri.substr(0, path_start));
  const std::string path = path_start == std::string_view::npos ? "/" : std::string(uri.substr(path_start));

  httplib::Client client(origin);
  client.set_connection_timeout(2);
  client.set_read_timeout(5);
  auto response = client.Get(path);
  if (!response) {
    throw IngestError(IngestError::Code::SourceUnavailable,
                      "scrape of " + src.uri + " failed: " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw IngestError(IngestError::Code::SourceUnavailable,
                      "scrape of " + src.uri + " returned HTTP " + std::to_string(response->status));
  }

  auto parsed = parse_exposition(response->body);
  IngestBatch batch;
  batch.cursor = cursor;
  batch.errors = std::move(parsed.errors);
  std::stable_sort(parsed.samples.begin(), parsed.samples.end(),
                   [](const MetricSample& a, const MetricSample& b) { return a.timestamp < b.timestamp; });
  for (auto& sample : parsed.samples) {
    if (sample.timestamp <= cursor.last_timestamp) continue;
    batch.cursor.last_timestamp = std::max(batch.cursor.last_timestamp, sample.timestamp);
    batch.events.push_back(std::move(sample));
  }
  return batch;
}

}  // namespace

std::string check_source(const SourceDescriptor& src) {
  if (src.uri.empty()) return "source uri is empty";
  if (src.poll_interval < kMinPollInterval) return "poll_interval must be at least 100 ms";
  if (is_http(src.uri) && src.kind != SourceKind::Metrics) {
    return "only METRICS sources can be scraped over HTTP";
  }
  return {};
}

std::vector<SourceDescriptor> trace_sources(const std::filesystem::path& dir, DurationMs poll_interval) {
  std::vector<SourceDescriptor> sources;
  for (auto kind : {SourceKind::Issues, SourceKind::Scans, SourceKind::Blocks, SourceKind::Metrics,
                    SourceKind::Logs}) {
    sources.push_back({kind, dir.string(), poll_interval});
  }
  return sources;
}

IngestBatch ingest_once(const SourceDescriptor& src, const Cursor& cursor) {
  if (auto problem = check_source(src); !problem.empty()) {
    throw IngestError(IngestError::Code::InvalidSource, problem);
  }
  return is_http(src.uri) ? ingest_http(src, cursor) : ingest_file(src, cursor);
}

std::vector<Issue> select_issues(std::vector<Issue> issues) {
  std::erase_if(issues, [](const Issue& i) { return i.priority < IssuePriority::High; });
  std::sort(issues.begin(), issues.end(), [](const Issue& a, const Issue& b) {
    if (a.updated != b.updated) return a.updated > b.updated;
    return a.issue_id < b.issue_id;
  });
  return issues;
}

std::vector<Issue> fetch_issues(const SourceDescriptor& src) {
  SourceDescriptor issues_src = src;
  issues_src.kind = SourceKind::Issues;
  auto batch = ingest_once(issues_src, Cursor{});
  std::vector<Issue> issues;
  for (auto& event : batch.events) issues.push_back(std::get<Issue>(std::move(event)));
  return select_issues(std::move(issues));
}

ScanReport run_scan_job(Store& store, const ChaincodeIR& chaincode, TimestampMs scanned_at) {
  auto report = scan_chaincode(chaincode, scanned_at);
  report.report_id += "#" + std::to_string(store.scans(chaincode.name).size() + 1);
  store.append({report});
  return report;
}

Collector::Collector(Store& store, SourceDescriptor src) : store_(store), src_(std::move(src)) {
  if (auto problem = check_source(src_); !problem.empty()) {
    throw IngestError(IngestError::Code::InvalidSource, problem);
  }
}

std::string Collector::cursor_key() const {
  return std::string(to_string(src_.kind)) + " " + src_.uri;
}

void Collector::store_events(std::vector<Event> events, CollectResult& result) {
  if (events.empty()) return;
  try {
    store_.append(events);
    result.stored += events.size();
    return;
  } catch (const StoreError&) {
    // Fall through: keep whatever part of the batch the store accepts.
  }
  bool reported = false;
  for (auto& event : events) {
    try {
      store_.append({event});
      ++result.stored;
    } catch (const StoreError& e) {
      if (e.code() == StoreError::Code::DuplicateEvent) {
        ++result.skipped;
      } else if (!reported) {
        reported = true;
        const auto at = std::holds_alternative<Block>(event) ? std::get<Block>(event).timestamp : 0;
        result.warnings.push_back(
            e.violations().empty()
                ? parse_error_alert(src_.kind, 0, "", e.what(), at)
                : stream_violation_alert(e.violations(), at));
      }
    }
  }
}

CollectResult Collector::poll() {
  const auto key = cursor_key();
  const auto cursor = store_.cursor(key).value_or(Cursor{});
  auto batch = ingest_once(src_, cursor);

  CollectResult result;
  const auto detected_at = std::max<TimestampMs>(cursor.last_timestamp, 0);
  for (const auto& error : batch.errors) {
    result.warnings.push_back(
        parse_error_alert(src_.kind, error.line, error.raw, error.message, detected_at));
  }

  std::vector<ChaincodeDeployment> deployments;
  if (src_.kind == SourceKind::Scans) {
    const auto known = store_.chaincodes();
    for (const auto& event : batch.events) {
      const auto& d = std::get<ChaincodeDeployment>(event);
      if (std::find(known.begin(), known.end(), d) == known.end()) deployments.push_back(d);
    }
  }
  store_events(std::move(batch.events), result);
  for (const auto& d : deployments) run_scan_job(store_, d.chaincode, d.timestamp);

  std::vector<Event> fresh;
  for (const auto& alert : result.warnings) {
    if (!store_.alert(alert.alert_id)) fresh.emplace_back(alert);
  }
  if (!fresh.empty()) store_.append(fresh);

  if (!(batch.cursor == cursor)) store_.save_cursor(key, batch.cursor);
  return result;
}

}  // namespace ledgerwatch
