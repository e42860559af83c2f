// SPDX-License-Identifier: Apache-2.0
//
// Pull adapters from a trace directory (or a metrics scrape endpoint) into the store.
#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerwatch/detect.hpp"
#include "ledgerwatch/model.hpp"
#include "ledgerwatch/store.hpp"

namespace ledgerwatch {

inline constexpr DurationMs kMinPollInterval = 100;

struct SourceDescriptor {
  SourceKind kind = SourceKind::Blocks;
  /// A trace directory, a .jsonl file, or (metrics only) an http:// scrape endpoint.
  std::string uri;
  DurationMs poll_interval = kSecond;
};

class IngestError : public std::runtime_error {
 public:
  enum class Code { SourceUnavailable, InvalidSource };
  IngestError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }
  bool retryable() const noexcept { return code_ == Code::SourceUnavailable; }

 private:
  Code code_;
};

std::string_view to_string(SourceKind kind);

/// Empty string when valid.
std::string check_source(const SourceDescriptor& src);

/// The file a directory source reads for its kind (SCANS reads chaincode deployments).
std::string_view source_file(SourceKind kind);

/// Descriptors for every stream of a trace directory, in replay order.
std::vector<SourceDescriptor> trace_sources(const std::filesystem::path& dir,
                                            DurationMs poll_interval = kSecond);

struct ParseError {
  std::uint64_t line = 0;
  std::string raw;
  std::string message;
};

struct IngestBatch {
  std::vector<Event> events;
  std::vector<ParseError> errors;
  Cursor cursor;
};

/// Complete lines appended after `cursor`, in stream order. A trailing partial line is left
/// for the next call. Throws IngestError.
IngestBatch ingest_once(const SourceDescriptor& src, const Cursor& cursor);

// --- text exposition ----------------------------------------------------------

struct ExpositionResult {
  std::vector<MetricSample> samples;
  std::vector<ParseError> errors;
};

/// Parses `series{label="v",...} value timestamp_ms` lines; '#' lines and blanks are skipped.
/// Series names match MetricSeries names case-insensitively.
ExpositionResult parse_exposition(std::string_view text);
std::string to_exposition(std::span<const MetricSample> samples);

// --- issues and scans ---------------------------------------------------------

/// HIGH and HIGHEST only, newest update first, ties by id.
std::vector<Issue> select_issues(std::vector<Issue> issues);

/// Reads the whole issue feed of `src` and applies select_issues. Throws IngestError.
std::vector<Issue> fetch_issues(const SourceDescriptor& src);

/// Scans a deployed chaincode and persists the report. Report ids are
/// "<chaincode>@<scanned_at>#<n>", n counting reports for that chaincode.
ScanReport run_scan_job(Store& store, const ChaincodeIR& chaincode, TimestampMs scanned_at);

// --- collection ---------------------------------------------------------------

struct CollectResult {
  std::size_t stored = 0;
  std::size_t skipped = 0;  // duplicates already in the store
  std::vector<Alert> warnings;
};

/// Feeds one source into the store, resuming from the cursor persisted there.
class Collector {
 public:
  Collector(Store& store, SourceDescriptor src);

  const SourceDescriptor& source() const { return src_; }
  std::string cursor_key() const;

  /// One ingest_once round: appends events, runs scan jobs for new deployments, records
  /// warnings for malformed lines and rejected blocks, then saves the cursor.
  CollectResult poll();

 private:
  void store_events(std::vector<Event> events, CollectResult& result);

  Store& store_;
  SourceDescriptor src_;
};

}  // namespace ledgerwatch
