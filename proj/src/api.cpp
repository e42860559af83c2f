// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/api.hpp"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>

#include "httplib.h"
#include "ledgerwatch/analytics.hpp"
#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/util.hpp"

namespace ledgerwatch {

namespace {

constexpr std::size_t kMaxRowsPerPage = 1000;
constexpr std::size_t kMaxBuckets = 100'000;

struct BadRequest : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
std::optional<T> int_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const auto text = req.get_param_value(name);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw BadRequest(std::string("malformed parameter '") + name + "'");
  }
  return value;
}

std::optional<std::string> string_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json report_summary(const std::optional<ScanReport>& report) {
  if (!report) return nullptr;
  std::map<std::string, std::size_t> by_severity{{"LOW", 0}, {"MEDIUM", 0}, {"HIGH", 0}};
  std::optional<FindingSeverity> max;
  for (const auto& f : report->findings) {
    ++by_severity[std::string(to_string(f.severity))];
    max = std::max(max.value_or(f.severity), f.severity);
  }
  return json{{"report_id", report->report_id},
              {"scanned_at", report->scanned_at},
              {"finding_count", report->findings.size()},
              {"findings_by_severity", by_severity},
              {"max_severity", max ? json(to_string(*max)) : json(nullptr)}};
}

bool newer_report(const ScanReport& a, const ScanReport& b) {
  return std::tie(a.scanned_at, a.report_id) > std::tie(b.scanned_at, b.report_id);
}

/// Fan-out of newly raised alerts to open event streams.
class AlertHub {
 public:
  struct Subscriber {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::string> pending;
    bool closed = false;
  };

  std::shared_ptr<Subscriber> subscribe() {
    auto sub = std::make_shared<Subscriber>();
    std::lock_guard lock(mutex_);
    if (closed_) sub->closed = true;
    subscribers_.insert(sub);
    return sub;
  }

  void unsubscribe(const std::shared_ptr<Subscriber>& sub) {
    std::lock_guard lock(mutex_);
    subscribers_.erase(sub);
  }

  void publish(const Alert& alert) {
    const std::string frame = "id: " + alert.alert_id + "\nevent: alert\ndata: " + to_line(alert) + "\n\n";
    std::lock_guard lock(mutex_);
    for (const auto& sub : subscribers_) {
      {
        std::lock_guard sub_lock(sub->mutex);
        sub->pending.push_back(frame);
      }
      sub->ready.notify_one();
    }
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    for (const auto& sub : subscribers_) {
      {
        std::lock_guard sub_lock(sub->mutex);
        sub->closed = true;
      }
      sub->ready.notify_all();
    }
  }

 private:
  std::mutex mutex_;
  std::set<std::shared_ptr<Subscriber>> subscribers_;
  bool closed_ = false;
};

}  // namespace

struct ApiServer::Impl {
  httplib::Server server;
  std::shared_ptr<AlertHub> hub = std::make_shared<AlertHub>();
};

ApiServer::ApiServer(Monitor& monitor, ApiConfig config)
    : impl_(std::make_unique<Impl>()), monitor_(monitor), config_(std::move(config)) {
  std::weak_ptr<AlertHub> weak_hub = impl_->hub;
  monitor_.store().on_alert([weak_hub](const Alert& alert) {
    if (auto hub = weak_hub.lock()) hub->publish(alert);
  });

  auto& svr = impl_->server;
  Store& store = monitor_.store();
  const auto origins = config_.cors_origins;

  svr.set_post_routing_handler([origins](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    const bool any = std::find(origins.begin(), origins.end(), "*") != origins.end();
    if (any || std::find(origins.begin(), origins.end(), origin) != origins.end()) {
      res.set_header("Access-Control-Allow-Origin", any ? "*" : origin);
      res.set_header("Vary", "Origin");
    }
  });
  svr.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.set_header("Access-Control-Max-Age", "600");
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const BadRequest& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const InvalidRange& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const NotFound& e) {
      send_json(res, {{"error", e.what()}}, 404);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  });

  svr.Get("/api/v1/status", [this, &store](const httplib::Request&, httplib::Response& res) {
    if (!monitor_.loaded()) {
      send_json(res, {{"error", "store is loading"}}, 503);
      return;
    }
    const auto chain = store.chain();
    std::map<std::string, std::size_t> counts{{"INFO", 0}, {"WARNING", 0}, {"HIGH", 0}};
    for (const auto& alert : store.alerts()) ++counts[std::string(to_string(alert.severity))];
    const auto& net = monitor_.options().network;
    json body{{"height", chain ? json(chain->height) : json(nullptr)},
              {"last_block_time", chain ? json(chain->last_block_time) : json(nullptr)},
              {"transaction_count", store.transaction_count()},
              {"node_count", net ? network_nodes(*net).size() : 0},
              {"msp_count", net ? net->msps.size() : 0},
              {"alert_counts", counts}};
    json errors = json::object();
    for (const auto& [source, message] : monitor_.source_errors()) errors[source] = message;
    body["source_errors"] = std::move(errors);
    send_json(res, body);
  });

  svr.Get("/api/v1/issues", [&store](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"issues", select_issues(store.issues())}});
  });

  svr.Get("/api/v1/alerts", [&store](const httplib::Request& req, httplib::Response& res) {
    const auto since = int_param<TimestampMs>(req, "since");
    auto alerts = store.alerts();
    if (since) std::erase_if(alerts, [&](const Alert& a) { return a.raised_at < *since; });
    std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
      if (a.raised_at != b.raised_at) return a.raised_at > b.raised_at;
      return a.alert_id < b.alert_id;
    });
    send_json(res, {{"alerts", alerts}});
  });

  svr.Get("/api/v1/alerts/stream", [this](const httplib::Request&, httplib::Response& res) {
    auto hub = impl_->hub;
    auto sub = hub->subscribe();
    const auto keepalive = std::chrono::milliseconds(keepalive_);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub, keepalive](std::size_t, httplib::DataSink& sink) {
          std::deque<std::string> frames;
          {
            std::unique_lock lock(sub->mutex);
            sub->ready.wait_for(lock, keepalive,
                                [&] { return !sub->pending.empty() || sub->closed; });
            if (sub->closed) return false;
            frames.swap(sub->pending);
          }
          if (frames.empty()) frames.push_back(": keepalive\n\n");
          for (const auto& frame : frames) {
            if (!sink.write(frame.data(), frame.size())) return false;
          }
          return true;
        },
        [hub, sub](bool) { hub->unsubscribe(sub); });
  });

  svr.Get("/api/v1/network", [this, &store](const httplib::Request& req, httplib::Response& res) {
    const auto now = int_param<TimestampMs>(req, "now");
    const auto net = monitor_.options().network.value_or(NetworkDescriptor{});
    send_json(res, build_network_graph(store, net, now));
  });

  svr.Get("/api/v1/logs", [&store](const httplib::Request& req, httplib::Response& res) {
    LogQuery query;
    query.node = string_param(req, "node");
    if (auto level = string_param(req, "level")) {
      auto parsed = parse_enum<LogLevel>(*level);
      if (!parsed) throw BadRequest("unknown log level '" + *level + "'");
      query.level_min = *parsed;
    }
    if (auto from = int_param<TimestampMs>(req, "from")) query.from = *from;
    if (auto to = int_param<TimestampMs>(req, "to")) query.to = *to;
    if (auto limit = int_param<long long>(req, "limit")) {
      if (*limit < 1 || static_cast<unsigned long long>(*limit) > kMaxLogLimit) {
        throw BadRequest("limit must be between 1 and " + std::to_string(kMaxLogLimit));
      }
      query.limit = static_cast<std::size_t>(*limit);
    }
    send_json(res, {{"logs", store.query_logs(query)}});
  });

  svr.Get("/api/v1/transactions", [&store](const httplib::Request& req, httplib::Response& res) {
    auto granularity = Granularity::Min1;
    if (auto g = string_param(req, "granularity")) {
      auto parsed = parse_granularity(*g);
      if (!parsed) throw BadRequest("granularity must be one of 1m, 1h, 12h, 24h");
      granularity = *parsed;
    }
    const auto chain = store.chain();
    const auto first = store.first_transaction_time().value_or(0);
    const auto from = int_param<TimestampMs>(req, "from").value_or(first);
    const auto to = int_param<TimestampMs>(req, "to").value_or(chain ? chain->last_block_time + 1 : from);
    if (from > to) throw BadRequest("from must not exceed to");
    const auto w = width(granularity);
    if (static_cast<std::size_t>((align_up(to, w) - align_down(from, w)) / w) > kMaxBuckets) {
      throw BadRequest("range too large for granularity " + std::string(to_string(granularity)));
    }

    TxFilter filter;
    filter.from = from;
    filter.to = to;
    filter.chaincode = string_param(req, "chaincode");
    filter.msp = string_param(req, "msp");
    if (auto type = string_param(req, "tx_type")) {
      filter.tx_type = parse_enum<TxType>(*type);
      if (!filter.tx_type) throw BadRequest("unknown tx_type '" + *type + "'");
    }
    const auto txs = store.query_transactions(filter);

    std::size_t offset = 0;
    if (auto cursor = string_param(req, "cursor")) {
      auto [ptr, ec] = std::from_chars(cursor->data(), cursor->data() + cursor->size(), offset, 16);
      if (cursor->empty() || ec != std::errc{} || ptr != cursor->data() + cursor->size() ||
          offset > txs.size()) {
        throw BadRequest("invalid cursor");
      }
    }
    std::size_t limit = kMaxRowsPerPage;
    if (auto l = int_param<long long>(req, "limit")) {
      if (*l < 1 || static_cast<std::size_t>(*l) > kMaxRowsPerPage) {
        throw BadRequest("limit must be between 1 and " + std::to_string(kMaxRowsPerPage));
      }
      limit = static_cast<std::size_t>(*l);
    }
    const auto end = std::min(txs.size(), offset + limit);
    json rows = json::array();
    for (auto i = offset; i < end; ++i) rows.push_back(txs[i]);

    send_json(res, {{"from", from},
                    {"to", to},
                    {"granularity", to_string(granularity)},
                    {"buckets", bucket_transactions(txs, granularity, from, to)},
                    {"latency", latency_series(store, from, to, granularity)},
                    {"rows", std::move(rows)},
                    {"total_rows", txs.size()},
                    {"next_cursor", end < txs.size() ? json(to_hex(end)) : json(nullptr)}});
  });

  svr.Get("/api/v1/chaincodes", [&store](const httplib::Request&, httplib::Response& res) {
    std::map<std::string, std::optional<TimestampMs>> deployed;
    for (const auto& d : store.chaincodes()) {
      auto& latest = deployed[d.chaincode.name];
      latest = std::max(latest.value_or(d.timestamp), d.timestamp);
    }
    std::map<std::string, std::optional<ScanReport>> latest;
    for (const auto& name : deployed) latest[name.first];
    for (auto& report : store.scans()) {
      auto& slot = latest[report.chaincode];
      if (!slot || newer_report(report, *slot)) slot = std::move(report);
    }
    json list = json::array();
    for (const auto& [name, report] : latest) {
      auto it = deployed.find(name);
      list.push_back({{"name", name},
                      {"deployed_at", it == deployed.end() ? json(nullptr) : json(*it->second)},
                      {"latest_scan", report_summary(report)}});
    }
    send_json(res, {{"chaincodes", std::move(list)}});
  });

  svr.Get(R"(/api/v1/chaincodes/([^/]+)/scans)", [&store](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    auto reports = store.scans(name);
    if (reports.empty()) {
      const auto deployments = store.chaincodes();
      const bool known = std::any_of(deployments.begin(), deployments.end(),
                                     [&](const ChaincodeDeployment& d) { return d.chaincode.name == name; });
      if (!known) throw NotFound("unknown chaincode '" + name + "'");
    }
    std::sort(reports.begin(), reports.end(), newer_report);
    send_json(res, {{"chaincode", name}, {"scans", reports}});
  });

  if (config_.static_dir) svr.set_mount_point("/", config_.static_dir->string());
}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::bind() {
  const auto address = parse_listen_address(config_.listen_address);
  if (!address) return false;
  if (address->port == 0) {
    port_ = impl_->server.bind_to_any_port(address->host);
    return port_ > 0;
  }
  if (!impl_->server.bind_to_port(address->host, address->port)) return false;
  port_ = address->port;
  return true;
}

void ApiServer::start() {
  if (thread_.joinable()) return;
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  impl_->hub->close();
  if (impl_->server.is_running()) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ledgerwatch
