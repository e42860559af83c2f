// SPDX-License-Identifier: Apache-2.0
#include "oracle/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace oracle {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::int64_t kHourMs = 3'600'000;

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::int64_t floor_to(std::int64_t t, std::int64_t w) {
  std::int64_t q = t / w;
  if (q * w > t) --q;
  return q * w;
}

std::int64_t ceil_to(std::int64_t t, std::int64_t w) {
  const auto f = floor_to(t, w);
  return f == t ? t : f + w;
}

std::string peer_name(const std::string& msp, unsigned j) {
  std::string org = msp;
  if (org.size() > 3 && org.substr(org.size() - 3) == "MSP") org.resize(org.size() - 3);
  for (auto& c : org) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return "peer" + std::to_string(j) + "." + org;
}

}  // namespace

RawTrace load(const fs::path& dir) {
  RawTrace raw;
  for (const auto& block : read_jsonl(dir / "blocks.jsonl")) {
    for (const auto& tx : block["transactions"]) {
      raw.txs.push_back({tx["timestamp"].get<std::int64_t>(), tx["tx_id"].get<std::string>(),
                         tx["creator_msp"].get<std::string>(), tx["chaincode"].get<std::string>(),
                         tx["tx_type"].get<std::string>(), tx["validation_code"].get<std::string>(),
                         tx["size_bytes"].get<std::uint64_t>(),
                         block["number"].get<std::uint64_t>()});
    }
  }
  for (const auto& m : read_jsonl(dir / "metrics.jsonl")) {
    RawSample s;
    s.ts = m["timestamp"].get<std::int64_t>();
    s.series = m["series"].get<std::string>();
    s.value = m["value"].get<double>();
    if (m.contains("labels")) {
      s.source = m["labels"].value("source", "");
      s.target = m["labels"].value("target", "");
    }
    raw.samples.push_back(s);
  }
  for (const auto& l : read_jsonl(dir / "logs.jsonl")) {
    raw.logs.push_back({l["timestamp"].get<std::int64_t>(), l["node"].get<std::string>(),
                        l["level"].get<std::string>()});
  }
  if (fs::exists(dir / "network.json")) {
    std::ifstream in(dir / "network.json");
    raw.network = json::parse(in);
  }
  if (fs::exists(dir / "scenarios.json")) {
    std::ifstream in(dir / "scenarios.json");
    raw.scenarios = json::parse(in);
  }
  return raw;
}

std::vector<RawTx> filter(const RawTrace& raw, const TxQuery& q) {
  std::vector<RawTx> out;
  for (const auto& tx : raw.txs) {
    if (tx.ts < q.from || tx.ts >= q.to) continue;
    if (q.chaincode && tx.chaincode != *q.chaincode) continue;
    if (q.msp && tx.msp != *q.msp) continue;
    if (q.type && tx.type != *q.type) continue;
    out.push_back(tx);
  }
  return out;
}

std::vector<Bucket> buckets(const RawTrace& raw, const TxQuery& q) {
  std::vector<Bucket> out;
  const auto start = floor_to(q.from, q.width);
  const auto end = ceil_to(q.to, q.width);
  const auto txs = filter(raw, q);
  for (auto b = start; b < end; b += q.width) {
    Bucket bucket;
    bucket.start = b;
    std::map<std::string, double> bytes;
    for (const auto& tx : txs) {
      if (tx.ts < b || tx.ts >= b + q.width) continue;
      ++bucket.counts[tx.msp];
      ++bucket.total;
      bytes[tx.msp] += static_cast<double>(tx.size);
    }
    for (const auto& [msp, sum] : bytes) {
      bucket.avg_size[msp] = sum / static_cast<double>(bucket.counts[msp]);
    }
    out.push_back(std::move(bucket));
  }
  return out;
}

std::vector<LatencyBucket> latency(const RawTrace& raw, std::int64_t from, std::int64_t to,
                                   std::int64_t width) {
  static const char* const names[] = {"ENDORSEMENT_DURATION", "ORDERING_LATENCY",
                                      "VALIDATION_DURATION"};
  std::vector<LatencyBucket> out;
  for (auto b = floor_to(from, width); b < ceil_to(to, width); b += width) {
    LatencyBucket bucket;
    bucket.start = b;
    for (int s = 0; s < 3; ++s) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& sample : raw.samples) {
        if (sample.series != names[s]) continue;
        if (sample.ts < from || sample.ts >= to) continue;
        if (sample.ts < b || sample.ts >= b + width) continue;
        sum += sample.value;
        ++n;
      }
      if (n > 0) bucket.means[s] = sum / static_cast<double>(n);
    }
    out.push_back(bucket);
  }
  return out;
}

Link link(const RawTrace& raw, const std::string& source, const std::string& target,
          std::int64_t now) {
  Link result;
  std::optional<std::int64_t> first;
  for (const auto& s : raw.samples) {
    if (s.series != "GOSSIP_SENT" || s.source != source || s.target != target) continue;
    if (!first || s.ts < *first) first = s.ts;
  }
  const std::int64_t cur_from = now - kHourMs;
  const std::int64_t hist_from = std::max(cur_from - 168 * kHourMs, first.value_or(cur_from));
  double history = 0.0;
  for (const auto& s : raw.samples) {
    if (s.series != "GOSSIP_SENT" || s.source != source || s.target != target) continue;
    if (s.ts >= cur_from && s.ts < now) result.current += s.value;
    if (s.ts >= hist_from && s.ts < cur_from) history += s.value;
  }
  const std::int64_t covered = cur_from - hist_from;
  if (covered < kHourMs / 2) {
    result.baseline = result.current;
    result.deviation = 0.0;
    return result;
  }
  result.baseline = history * static_cast<double>(kHourMs) / static_cast<double>(covered);
  const double denom = result.current + result.baseline;
  result.deviation = denom == 0.0 ? 0.0 : (result.current - result.baseline) / denom;
  return result;
}

GraphShape graph_shape(const RawTrace& raw) {
  GraphShape shape;
  const auto& net = raw.network;
  const auto local = net["local_msp"].get<std::string>();
  const auto peers = net["peers_per_msp"].get<unsigned>();
  std::set<std::string> local_ids;
  for (const auto& msp : net["msps"]) {
    for (unsigned j = 0; j < peers; ++j) {
      if (msp == local) {
        local_ids.insert(peer_name(msp, j));
      } else {
        ++shape.foreign_nodes;
      }
    }
  }
  for (const auto& o : net["orderers"]) {
    if (o["msp"] == local) {
      local_ids.insert(o["id"].get<std::string>());
    } else {
      ++shape.foreign_nodes;
    }
  }
  std::set<std::pair<std::string, std::string>> links;
  for (const auto& s : raw.samples) {
    if (s.series != "GOSSIP_SENT") continue;
    local_ids.insert(s.source);
    local_ids.insert(s.target);
    links.insert({s.source, s.target});
  }
  shape.local_nodes = local_ids.size();
  shape.local_links.assign(links.begin(), links.end());
  return shape;
}

std::vector<ledgerwatch::Finding> scan(const ledgerwatch::ChaincodeIR& ir) {
  using namespace ledgerwatch;
  std::vector<Finding> raw_findings;
  std::vector<Finding> nondeterminism;
  for (const auto& fn : ir.functions) {
    std::set<std::string> keys;
    for (std::size_t i = 0; i < fn.ops.size(); ++i) {
      for (std::size_t j = i + 1; j < fn.ops.size(); ++j) {
        if (fn.ops[i].kind == OpKind::Write && fn.ops[j].kind == OpKind::Read &&
            fn.ops[i].arg == fn.ops[j].arg) {
          keys.insert(fn.ops[i].arg);
        }
      }
    }
    for (const auto& k : keys) {
      raw_findings.push_back({FindingRule::ReadAfterWrite, fn.name, k, FindingSeverity::High});
    }
    for (const auto& op : fn.ops) {
      if (op.kind == OpKind::Random) {
        raw_findings.push_back({FindingRule::Nondeterminism, fn.name, "RANDOM", FindingSeverity::Medium});
      } else if (op.kind == OpKind::Timestamp) {
        raw_findings.push_back(
            {FindingRule::Nondeterminism, fn.name, "TIMESTAMP", FindingSeverity::Medium});
      }
    }
  }
  std::sort(raw_findings.begin(), raw_findings.end(), [](const Finding& a, const Finding& b) {
    if (a.function != b.function) return a.function < b.function;
    if (a.rule != b.rule) return a.rule == FindingRule::ReadAfterWrite;
    return a.key_or_source < b.key_or_source;
  });
  return raw_findings;
}

bool close(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace oracle
