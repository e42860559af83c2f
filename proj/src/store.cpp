// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

std::string_view to_string(StreamKind kind) {
  switch (kind) {
    case StreamKind::Blocks: return "blocks";
    case StreamKind::Metrics: return "metrics";
    case StreamKind::Logs: return "logs";
    case StreamKind::Chaincodes: return "chaincodes";
    case StreamKind::Scans: return "scans";
    case StreamKind::Issues: return "issues";
    case StreamKind::Alerts: return "alerts";
  }
  return "?";
}

namespace {

const char* file_name(StreamKind kind) {
  switch (kind) {
    case StreamKind::Blocks: return kBlocksFile;
    case StreamKind::Metrics: return kMetricsFile;
    case StreamKind::Logs: return kLogsFile;
    case StreamKind::Chaincodes: return kChaincodesFile;
    case StreamKind::Scans: return kScansFile;
    case StreamKind::Issues: return kIssuesFile;
    case StreamKind::Alerts: return kAlertsFile;
  }
  return "";
}

StreamKind stream_of(const Event& event) {
  return static_cast<StreamKind>(event.index());
}

/// Append-only file handle; every write is flushed and fsync'ed before returning.
class AppendFile {
 public:
  explicit AppendFile(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "ab");
    if (!file_) throw StoreError(StoreError::Code::Io, "cannot open " + path.string());
  }
  ~AppendFile() {
    if (file_) std::fclose(file_);
  }
  AppendFile(const AppendFile&) = delete;
  AppendFile& operator=(const AppendFile&) = delete;

  void write(const std::string& data) {
    if (std::fwrite(data.data(), 1, data.size(), file_) != data.size() || std::fflush(file_) != 0 ||
        ::fsync(::fileno(file_)) != 0) {
      throw StoreError(StoreError::Code::Io, "write to " + path_.string() + " failed");
    }
  }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

struct SeriesKey {
  MetricSeries series;
  Labels labels;

  friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

struct SeriesData {
  std::vector<TimestampMs> times;
  std::vector<double> values;
  std::vector<double> prefix{0.0};  // prefix[i] == sum of values[0, i)

  void insert(TimestampMs t, double v) {
    if (times.empty() || t > times.back()) {
      times.push_back(t);
      values.push_back(v);
      prefix.push_back(prefix.back() + v);
      return;
    }
    const auto pos = static_cast<std::size_t>(
        std::upper_bound(times.begin(), times.end(), t) - times.begin());
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(pos), t);
    values.insert(values.begin() + static_cast<std::ptrdiff_t>(pos), v);
    prefix.resize(values.size() + 1);
    for (std::size_t i = pos; i < values.size(); ++i) prefix[i + 1] = prefix[i] + values[i];
  }

  bool contains(TimestampMs t) const { return std::binary_search(times.begin(), times.end(), t); }

  std::pair<std::size_t, std::size_t> range(TimestampMs from, TimestampMs to) const {
    const auto lo = std::lower_bound(times.begin(), times.end(), from) - times.begin();
    const auto hi = std::lower_bound(times.begin(), times.end(), to) - times.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
  }
};

bool labels_match(const Labels& have, const Labels& want) {
  for (const auto& [k, v] : want) {
    auto it = have.find(k);
    if (it == have.end() || it->second != v) return false;
  }
  return true;
}

struct TxPos {
  std::uint32_t block;
  std::uint32_t index;  // position inside Block::transactions
};

}  // namespace

struct Store::Impl {
  mutable std::shared_mutex index_mutex;
  std::mutex writer_mutex;
  std::optional<std::filesystem::path> dir;
  std::map<StreamKind, std::unique_ptr<AppendFile>> files;
  std::uint64_t seq = 0;

  std::vector<Block> blocks;
  std::vector<TxPos> txs;  // ordered by (block_num, tx_index)
  std::vector<std::pair<TimestampMs, std::uint32_t>> tx_by_time;
  std::unordered_map<std::string, std::vector<std::uint32_t>> tx_by_chaincode;
  std::unordered_map<std::string, std::vector<std::uint32_t>> tx_by_msp;
  std::vector<std::uint32_t> config_txs;
  std::unordered_set<std::string> tx_ids;

  std::map<SeriesKey, SeriesData> series;
  std::optional<TimestampMs> latest_metric;

  std::vector<LogLine> logs;  // ordered by timestamp, insertion order within a timestamp

  std::vector<ChaincodeDeployment> chaincodes;
  std::set<std::pair<std::string, TimestampMs>> chaincode_keys;
  std::vector<ScanReport> scans;
  std::unordered_set<std::string> scan_ids;
  std::vector<Issue> issues;
  std::unordered_set<std::string> issue_ids;
  std::vector<Alert> alerts;
  std::unordered_map<std::string, std::size_t> alert_pos;

  std::map<std::string, Cursor> cursors;
  std::vector<std::function<void(const Alert&)>> listeners;

  const Transaction& tx_at(std::uint32_t pos) const {
    const auto& p = txs[pos];
    return blocks[p.block].transactions[p.index];
  }

  std::optional<ChainTip> chain_tip() const {
    if (blocks.empty()) return std::nullopt;
    return ChainTip{blocks.back().number + 1, blocks.back().data_hash};
  }

  // Checks a batch against the current indexes. Caller holds writer_mutex.
  void check(const std::vector<Event>& events) const {
    std::vector<Block> batch_blocks;
    std::unordered_set<std::string> batch_tx_ids;
    std::set<std::pair<SeriesKey, TimestampMs>> batch_samples;
    std::set<std::pair<std::string, TimestampMs>> batch_chaincodes;
    std::unordered_set<std::string> batch_scans, batch_issues, batch_alerts;
    const std::uint64_t next_block = blocks.empty() ? 0 : blocks.back().number + 1;

    auto duplicate = [](const std::string& what) {
      return StoreError(StoreError::Code::DuplicateEvent, "duplicate " + what);
    };
    auto invalid = [](const std::string& what) {
      return StoreError(StoreError::Code::ValidationFailed, what);
    };

    for (const auto& event : events) {
      std::visit(
          [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Block>) {
              if (!blocks.empty() && e.number < next_block) {
                throw duplicate("block " + std::to_string(e.number));
              }
              for (const auto& tx : e.transactions) {
                if (tx_ids.contains(tx.tx_id) || !batch_tx_ids.insert(tx.tx_id).second) {
                  throw duplicate("transaction " + tx.tx_id);
                }
              }
              batch_blocks.push_back(e);
            } else if constexpr (std::is_same_v<T, MetricSample>) {
              if (auto problem = check_sample(e); !problem.empty()) throw invalid(problem);
              SeriesKey key{e.series, e.labels};
              auto it = series.find(key);
              if ((it != series.end() && it->second.contains(e.timestamp)) ||
                  !batch_samples.insert({key, e.timestamp}).second) {
                throw duplicate("sample " + std::string(to_string(e.series)) + "@" +
                                std::to_string(e.timestamp));
              }
            } else if constexpr (std::is_same_v<T, ChaincodeDeployment>) {
              std::pair key{e.chaincode.name, e.timestamp};
              if (e.chaincode.name.empty()) throw invalid("chaincode without a name");
              if (chaincode_keys.contains(key) || !batch_chaincodes.insert(key).second) {
                throw duplicate("chaincode deployment " + e.chaincode.name);
              }
            } else if constexpr (std::is_same_v<T, ScanReport>) {
              if (scan_ids.contains(e.report_id) || !batch_scans.insert(e.report_id).second) {
                throw duplicate("scan report " + e.report_id);
              }
            } else if constexpr (std::is_same_v<T, Issue>) {
              if (issue_ids.contains(e.issue_id) || !batch_issues.insert(e.issue_id).second) {
                throw duplicate("issue " + e.issue_id);
              }
            } else if constexpr (std::is_same_v<T, Alert>) {
              if (auto problem = check_alert(e); !problem.empty()) throw invalid(problem);
              if (alert_pos.contains(e.alert_id) || !batch_alerts.insert(e.alert_id).second) {
                throw duplicate("alert " + e.alert_id);
              }
            }
          },
          event);
    }

    if (!batch_blocks.empty()) {
      auto violations = validate_stream(batch_blocks, chain_tip());
      if (!violations.empty()) {
        auto message = "block stream violation: " + violations.front().detail;
        throw StoreError(StoreError::Code::ValidationFailed, message, std::move(violations));
      }
    }
  }

  // Caller holds index_mutex exclusively.
  void index(const Event& event) {
    ++seq;
    std::visit(
        [this](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, Block>) {
            index_block(e);
          } else if constexpr (std::is_same_v<T, MetricSample>) {
            series[SeriesKey{e.series, e.labels}].insert(e.timestamp, e.value);
            latest_metric = std::max(latest_metric.value_or(e.timestamp), e.timestamp);
          } else if constexpr (std::is_same_v<T, LogLine>) {
            auto it = std::upper_bound(
                logs.begin(), logs.end(), e.timestamp,
                [](TimestampMs t, const LogLine& line) { return t < line.timestamp; });
            logs.insert(it, e);
          } else if constexpr (std::is_same_v<T, ChaincodeDeployment>) {
            chaincode_keys.insert({e.chaincode.name, e.timestamp});
            chaincodes.push_back(e);
          } else if constexpr (std::is_same_v<T, ScanReport>) {
            scan_ids.insert(e.report_id);
            scans.push_back(e);
          } else if constexpr (std::is_same_v<T, Issue>) {
            issue_ids.insert(e.issue_id);
            issues.push_back(e);
          } else if constexpr (std::is_same_v<T, Alert>) {
            upsert_alert(e);
          }
        },
        event);
  }

  void upsert_alert(const Alert& alert) {
    auto it = alert_pos.find(alert.alert_id);
    if (it == alert_pos.end()) {
      alert_pos.emplace(alert.alert_id, alerts.size());
      alerts.push_back(alert);
    } else {
      alerts[it->second] = alert;
    }
  }

  void index_block(const Block& block) {
    const auto b = static_cast<std::uint32_t>(blocks.size());
    blocks.push_back(block);
    const auto& stored = blocks.back();

    std::vector<std::uint32_t> order(stored.transactions.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&stored](std::uint32_t x, std::uint32_t y) {
      return stored.transactions[x].tx_index < stored.transactions[y].tx_index;
    });

    for (const auto i : order) {
      const auto& tx = stored.transactions[i];
      const auto pos = static_cast<std::uint32_t>(txs.size());
      txs.push_back({b, i});
      tx_ids.insert(tx.tx_id);
      std::pair entry{tx.timestamp, pos};
      if (tx_by_time.empty() || tx_by_time.back() <= entry) {
        tx_by_time.push_back(entry);
      } else {
        tx_by_time.insert(std::upper_bound(tx_by_time.begin(), tx_by_time.end(), entry), entry);
      }
      if (!tx.chaincode.empty()) tx_by_chaincode[tx.chaincode].push_back(pos);
      tx_by_msp[tx.creator_msp].push_back(pos);
      if (tx.tx_type == TxType::Config) config_txs.push_back(pos);
    }
  }

  AppendFile& file(StreamKind kind) {
    auto& slot = files[kind];
    if (!slot) slot = std::make_unique<AppendFile>(*dir / file_name(kind));
    return *slot;
  }

  void persist(const std::vector<Event>& events) {
    if (!dir) return;
    std::map<StreamKind, std::string> chunks;
    for (const auto& event : events) {
      auto& chunk = chunks[stream_of(event)];
      std::visit([&chunk](const auto& e) { chunk += to_line(e); }, event);
      chunk += '\n';
    }
    for (const auto& [kind, chunk] : chunks) file(kind).write(chunk);
  }

  void write_cursors() const {
    if (!dir) return;
    json j = json::object();
    for (const auto& [name, c] : cursors) {
      j[name] = {{"offset", c.offset}, {"line", c.line}, {"last_timestamp", c.last_timestamp}};
    }
    const auto path = *dir / kCursorsFile;
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << j.dump() << '\n';
      if (!out) throw StoreError(StoreError::Code::Io, "cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  template <typename T>
  void load_stream(StreamKind kind, std::vector<std::string>& warnings) {
    const auto path = *dir / file_name(kind);
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::string line;
    std::uint64_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      try {
        Event event = json::parse(line).get<T>();
        if constexpr (std::is_same_v<T, Alert>) {
          // Repeated ids are later versions of the same alert.
          const auto& alert = std::get<Alert>(event);
          if (alert_pos.contains(alert.alert_id)) {
            upsert_alert(alert);
            continue;
          }
        }
        check({event});
        index(event);
      } catch (const std::exception& e) {
        warnings.push_back(std::string(file_name(kind)) + ":" + std::to_string(number) + ": " +
                           e.what());
      }
    }
  }

  void load_cursors(std::vector<std::string>& warnings) {
    std::ifstream in(*dir / kCursorsFile);
    if (!in) return;
    try {
      const auto j = json::parse(in);
      for (const auto& [name, c] : j.items()) {
        cursors[name] = Cursor{c.at("offset").get<std::uint64_t>(), c.at("line").get<std::uint64_t>(),
                               c.at("last_timestamp").get<TimestampMs>()};
      }
    } catch (const std::exception& e) {
      warnings.push_back(std::string(kCursorsFile) + ": " + e.what());
    }
  }
};

Store::Store() : impl_(std::make_unique<Impl>()) {}

Store::Store(std::filesystem::path data_dir) : impl_(std::make_unique<Impl>()) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir, ec);
  if (ec) throw StoreError(StoreError::Code::Io, "cannot create " + data_dir.string());
  data_dir_ = data_dir;
  impl_->dir = std::move(data_dir);

  impl_->load_stream<Block>(StreamKind::Blocks, load_warnings_);
  impl_->load_stream<MetricSample>(StreamKind::Metrics, load_warnings_);
  impl_->load_stream<LogLine>(StreamKind::Logs, load_warnings_);
  impl_->load_stream<ChaincodeDeployment>(StreamKind::Chaincodes, load_warnings_);
  impl_->load_stream<ScanReport>(StreamKind::Scans, load_warnings_);
  impl_->load_stream<Issue>(StreamKind::Issues, load_warnings_);
  impl_->load_stream<Alert>(StreamKind::Alerts, load_warnings_);
  impl_->load_cursors(load_warnings_);
}

Store::~Store() = default;

std::uint64_t Store::append(const std::vector<Event>& events) {
  std::lock_guard writer(impl_->writer_mutex);
  impl_->check(events);
  impl_->persist(events);
  {
    std::unique_lock lock(impl_->index_mutex);
    for (const auto& event : events) impl_->index(event);
  }
  for (const auto& event : events) {
    if (const auto* alert = std::get_if<Alert>(&event)) {
      for (const auto& listener : impl_->listeners) listener(*alert);
    }
  }
  std::shared_lock lock(impl_->index_mutex);
  return impl_->seq;
}

void Store::supersede_alert(const Alert& alert) {
  std::lock_guard writer(impl_->writer_mutex);
  {
    std::shared_lock lock(impl_->index_mutex);
    if (!impl_->alert_pos.contains(alert.alert_id)) {
      throw StoreError(StoreError::Code::ValidationFailed, "unknown alert " + alert.alert_id);
    }
  }
  if (auto problem = check_alert(alert); !problem.empty()) {
    throw StoreError(StoreError::Code::ValidationFailed, problem);
  }
  impl_->persist({alert});
  std::unique_lock lock(impl_->index_mutex);
  impl_->upsert_alert(alert);
}

std::uint64_t Store::sequence() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->seq;
}

void Store::on_alert(std::function<void(const Alert&)> listener) {
  std::lock_guard writer(impl_->writer_mutex);
  impl_->listeners.push_back(std::move(listener));
}

std::optional<ChainSummary> Store::chain() const {
  std::shared_lock lock(impl_->index_mutex);
  if (impl_->blocks.empty()) return std::nullopt;
  const auto& last = impl_->blocks.back();
  return ChainSummary{impl_->blocks.size(), last.timestamp, last.data_hash};
}

std::optional<ChainTip> Store::tip() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->chain_tip();
}

bool Store::has_block(std::uint64_t number) const {
  std::shared_lock lock(impl_->index_mutex);
  return !impl_->blocks.empty() && number <= impl_->blocks.back().number;
}

bool Store::has_transaction(const std::string& tx_id) const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->tx_ids.contains(tx_id);
}

std::vector<Transaction> Store::query_transactions(const TxFilter& filter) const {
  if (filter.from > filter.to) throw InvalidRange("from must not exceed to");
  std::shared_lock lock(impl_->index_mutex);
  const auto& im = *impl_;

  auto matches = [&filter, &im](std::uint32_t pos) {
    const auto& tx = im.tx_at(pos);
    return tx.timestamp >= filter.from && tx.timestamp < filter.to &&
           (!filter.chaincode || tx.chaincode == *filter.chaincode) &&
           (!filter.msp || tx.creator_msp == *filter.msp) &&
           (!filter.tx_type || tx.tx_type == *filter.tx_type);
  };

  std::vector<std::uint32_t> positions;
  auto scan = [&](const std::vector<std::uint32_t>& candidates) {
    for (auto pos : candidates) {
      if (matches(pos)) positions.push_back(pos);
    }
  };
  static const std::vector<std::uint32_t> kNone;
  if (filter.chaincode) {
    auto it = im.tx_by_chaincode.find(*filter.chaincode);
    scan(it == im.tx_by_chaincode.end() ? kNone : it->second);
  } else if (filter.msp) {
    auto it = im.tx_by_msp.find(*filter.msp);
    scan(it == im.tx_by_msp.end() ? kNone : it->second);
  } else if (filter.tx_type == TxType::Config) {
    scan(im.config_txs);
  } else {
    auto lo = std::lower_bound(im.tx_by_time.begin(), im.tx_by_time.end(),
                               std::pair{filter.from, std::uint32_t{0}});
    auto hi = std::lower_bound(im.tx_by_time.begin(), im.tx_by_time.end(),
                               std::pair{filter.to, std::uint32_t{0}});
    for (auto it = lo; it < hi; ++it) {
      if (matches(it->second)) positions.push_back(it->second);
    }
    std::sort(positions.begin(), positions.end());
  }

  std::vector<Transaction> out;
  out.reserve(positions.size());
  for (auto pos : positions) out.push_back(im.tx_at(pos));
  return out;
}

std::size_t Store::transaction_count() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->txs.size();
}

std::optional<TimestampMs> Store::first_transaction_time() const {
  std::shared_lock lock(impl_->index_mutex);
  if (impl_->tx_by_time.empty()) return std::nullopt;
  return impl_->tx_by_time.front().first;
}

std::vector<MetricSample> Store::query_metrics(MetricSeries series, const Labels& labels,
                                               TimestampMs from, TimestampMs to) const {
  if (from > to) throw InvalidRange("from must not exceed to");
  std::shared_lock lock(impl_->index_mutex);
  std::vector<MetricSample> out;
  for (auto it = impl_->series.lower_bound(SeriesKey{series, {}});
       it != impl_->series.end() && it->first.series == series; ++it) {
    if (!labels_match(it->first.labels, labels)) continue;
    const auto& data = it->second;
    const auto [lo, hi] = data.range(from, to);
    for (auto i = lo; i < hi; ++i) out.push_back({data.times[i], series, it->first.labels, data.values[i]});
  }
  std::stable_sort(out.begin(), out.end(), [](const MetricSample& a, const MetricSample& b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

double Store::sum_metric(MetricSeries series, const Labels& labels, TimestampMs from,
                         TimestampMs to) const {
  std::shared_lock lock(impl_->index_mutex);
  auto it = impl_->series.find(SeriesKey{series, labels});
  if (it == impl_->series.end() || from >= to) return 0.0;
  const auto [lo, hi] = it->second.range(from, to);
  return it->second.prefix[hi] - it->second.prefix[lo];
}

std::optional<TimestampMs> Store::first_sample_time(MetricSeries series,
                                                    const Labels& labels) const {
  std::shared_lock lock(impl_->index_mutex);
  auto it = impl_->series.find(SeriesKey{series, labels});
  if (it == impl_->series.end() || it->second.times.empty()) return std::nullopt;
  return it->second.times.front();
}

std::optional<TimestampMs> Store::first_sample_time(MetricSeries series) const {
  std::shared_lock lock(impl_->index_mutex);
  std::optional<TimestampMs> first;
  for (auto it = impl_->series.lower_bound(SeriesKey{series, {}});
       it != impl_->series.end() && it->first.series == series; ++it) {
    if (it->second.times.empty()) continue;
    first = std::min(first.value_or(it->second.times.front()), it->second.times.front());
  }
  return first;
}

std::vector<Labels> Store::label_sets(MetricSeries series) const {
  std::shared_lock lock(impl_->index_mutex);
  std::vector<Labels> out;
  for (auto it = impl_->series.lower_bound(SeriesKey{series, {}});
       it != impl_->series.end() && it->first.series == series; ++it) {
    out.push_back(it->first.labels);
  }
  return out;
}

bool Store::has_sample(const MetricSample& sample) const {
  std::shared_lock lock(impl_->index_mutex);
  auto it = impl_->series.find(SeriesKey{sample.series, sample.labels});
  return it != impl_->series.end() && it->second.contains(sample.timestamp);
}

std::vector<LogLine> Store::query_logs(const LogQuery& query) const {
  if (query.from > query.to) throw InvalidRange("from must not exceed to");
  std::shared_lock lock(impl_->index_mutex);
  const auto& logs = impl_->logs;
  auto hi = std::lower_bound(logs.begin(), logs.end(), query.to,
                             [](const LogLine& line, TimestampMs t) { return line.timestamp < t; });
  std::vector<LogLine> out;
  for (auto it = hi; it != logs.begin() && out.size() < query.limit;) {
    --it;
    if (it->timestamp < query.from) break;
    if (it->level < query.level_min) continue;
    if (query.node && it->node != *query.node) continue;
    out.push_back(*it);
  }
  return out;
}

std::vector<ChaincodeDeployment> Store::chaincodes() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->chaincodes;
}

std::vector<ScanReport> Store::scans(const std::optional<std::string>& chaincode) const {
  std::shared_lock lock(impl_->index_mutex);
  if (!chaincode) return impl_->scans;
  std::vector<ScanReport> out;
  for (const auto& r : impl_->scans) {
    if (r.chaincode == *chaincode) out.push_back(r);
  }
  return out;
}

std::vector<Issue> Store::issues() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->issues;
}

std::vector<Alert> Store::alerts() const {
  std::shared_lock lock(impl_->index_mutex);
  return impl_->alerts;
}

std::optional<Alert> Store::alert(const std::string& alert_id) const {
  std::shared_lock lock(impl_->index_mutex);
  auto it = impl_->alert_pos.find(alert_id);
  if (it == impl_->alert_pos.end()) return std::nullopt;
  return impl_->alerts[it->second];
}

std::optional<TimestampMs> Store::latest_timestamp(StreamKind stream) const {
  std::shared_lock lock(impl_->index_mutex);
  const auto& im = *impl_;
  switch (stream) {
    case StreamKind::Blocks:
      if (im.blocks.empty()) return std::nullopt;
      return im.blocks.back().timestamp;
    case StreamKind::Metrics:
      return im.latest_metric;
    case StreamKind::Logs:
      if (im.logs.empty()) return std::nullopt;
      return im.logs.back().timestamp;
    case StreamKind::Chaincodes: {
      std::optional<TimestampMs> t;
      for (const auto& c : im.chaincodes) t = std::max(t.value_or(c.timestamp), c.timestamp);
      return t;
    }
    case StreamKind::Scans: {
      std::optional<TimestampMs> t;
      for (const auto& s : im.scans) t = std::max(t.value_or(s.scanned_at), s.scanned_at);
      return t;
    }
    case StreamKind::Issues: {
      std::optional<TimestampMs> t;
      for (const auto& i : im.issues) t = std::max(t.value_or(i.updated), i.updated);
      return t;
    }
    case StreamKind::Alerts: {
      std::optional<TimestampMs> t;
      for (const auto& a : im.alerts) t = std::max(t.value_or(a.raised_at), a.raised_at);
      return t;
    }
  }
  return std::nullopt;
}

std::optional<Cursor> Store::cursor(const std::string& source) const {
  std::shared_lock lock(impl_->index_mutex);
  auto it = impl_->cursors.find(source);
  if (it == impl_->cursors.end()) return std::nullopt;
  return it->second;
}

void Store::save_cursor(const std::string& source, const Cursor& cursor) {
  std::lock_guard writer(impl_->writer_mutex);
  {
    std::unique_lock lock(impl_->index_mutex);
    impl_->cursors[source] = cursor;
  }
  impl_->write_cursors();
}

}  // namespace ledgerwatch
