// SPDX-License-Identifier: Apache-2.0
//
// Append-only event store. Every stream is persisted as newline-delimited JSON in the
// data directory and mirrored by in-memory indexes that are rebuilt on open.
//
// Single writer, many readers: append() is serialized internally; queries take a
// shared lock and always observe whole events.
#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ledgerwatch/model.hpp"

namespace ledgerwatch {

using Event =
    std::variant<Block, MetricSample, LogLine, ChaincodeDeployment, ScanReport, Issue, Alert>;

enum class StreamKind { Blocks, Metrics, Logs, Chaincodes, Scans, Issues, Alerts };

class StoreError : public std::runtime_error {
 public:
  enum class Code { DuplicateEvent, ValidationFailed, Io };

  StoreError(Code code, const std::string& what, std::vector<StreamViolation> violations = {})
      : std::runtime_error(what), code_(code), violations_(std::move(violations)) {}

  Code code() const noexcept { return code_; }
  const std::vector<StreamViolation>& violations() const noexcept { return violations_; }

 private:
  Code code_;
  std::vector<StreamViolation> violations_;
};

/// Thrown by queries whose range has from > to.
class InvalidRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TxFilter {
  TimestampMs from = std::numeric_limits<TimestampMs>::min();
  TimestampMs to = std::numeric_limits<TimestampMs>::max();
  std::optional<std::string> chaincode;
  std::optional<MspId> msp;
  std::optional<TxType> tx_type;
};

struct LogQuery {
  std::optional<std::string> node;
  LogLevel level_min = LogLevel::Debug;
  TimestampMs from = std::numeric_limits<TimestampMs>::min();
  TimestampMs to = std::numeric_limits<TimestampMs>::max();
  std::size_t limit = 100;
};

inline constexpr std::size_t kMaxLogLimit = 10'000;

/// Position in a source stream: byte offset past the last consumed line, that line's number,
/// and the newest sample timestamp seen (used by scrape endpoints).
struct Cursor {
  std::uint64_t offset = 0;
  std::uint64_t line = 0;
  TimestampMs last_timestamp = std::numeric_limits<TimestampMs>::min();

  friend bool operator==(const Cursor&, const Cursor&) = default;
};

struct ChainSummary {
  std::uint64_t height = 0;  // number of blocks
  TimestampMs last_block_time = 0;
  std::string last_hash;
};

class Store {
 public:
  /// In-memory store; nothing is persisted.
  Store();

  /// Opens (creating if needed) a store directory and replays its log into the indexes.
  /// Unparseable or invalid lines are skipped and reported through load_warnings().
  explicit Store(std::filesystem::path data_dir);

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::optional<std::filesystem::path>& data_dir() const { return data_dir_; }
  const std::vector<std::string>& load_warnings() const { return load_warnings_; }

  /// Validates, persists (flushed and synced) and indexes a batch, all or nothing.
  /// Returns the sequence number of the last event. Throws StoreError.
  std::uint64_t append(const std::vector<Event>& events);

  /// Persists a newer version of an existing alert (e.g. its window grew). Not announced to
  /// alert listeners. Throws StoreError if the alert id is unknown.
  void supersede_alert(const Alert& alert);

  std::uint64_t sequence() const;

  /// Called (under the writer lock, after indexing) for every newly appended alert.
  void on_alert(std::function<void(const Alert&)> listener);

  // --- ledger -------------------------------------------------------------
  std::optional<ChainSummary> chain() const;
  std::optional<ChainTip> tip() const;
  bool has_block(std::uint64_t number) const;
  bool has_transaction(const std::string& tx_id) const;

  /// Matching transactions in [from, to), ordered by (block_num, tx_index).
  std::vector<Transaction> query_transactions(const TxFilter& filter) const;
  std::size_t transaction_count() const;
  std::optional<TimestampMs> first_transaction_time() const;

  // --- metrics ------------------------------------------------------------
  /// Samples of `series` in [from, to) whose labels include every pair in `labels`, ordered
  /// by (timestamp, labels).
  std::vector<MetricSample> query_metrics(MetricSeries series, const Labels& labels,
                                          TimestampMs from, TimestampMs to) const;

  /// Sum of values of one exact series key over [from, to).
  double sum_metric(MetricSeries series, const Labels& labels, TimestampMs from,
                    TimestampMs to) const;
  std::optional<TimestampMs> first_sample_time(MetricSeries series, const Labels& labels) const;
  std::optional<TimestampMs> first_sample_time(MetricSeries series) const;
  std::vector<Labels> label_sets(MetricSeries series) const;
  bool has_sample(const MetricSample& sample) const;

  // --- logs ---------------------------------------------------------------
  /// Most recent matching lines in [from, to), newest first, at most `limit`.
  std::vector<LogLine> query_logs(const LogQuery& query) const;

  // --- chaincodes, scans, issues, alerts ------------------------------------
  std::vector<ChaincodeDeployment> chaincodes() const;
  std::vector<ScanReport> scans(const std::optional<std::string>& chaincode = std::nullopt) const;
  std::vector<Issue> issues() const;
  std::vector<Alert> alerts() const;
  std::optional<Alert> alert(const std::string& alert_id) const;

  /// Newest timestamp per stream (blocks: block time).
  std::optional<TimestampMs> latest_timestamp(StreamKind stream) const;

  // --- ingestion cursors ----------------------------------------------------
  std::optional<Cursor> cursor(const std::string& source) const;
  void save_cursor(const std::string& source, const Cursor& cursor);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::optional<std::filesystem::path> data_dir_;
  std::vector<std::string> load_warnings_;
};

std::string_view to_string(StreamKind kind);

}  // namespace ledgerwatch
