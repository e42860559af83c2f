// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

void to_json(json& j, const NodeRef& v) {
  j = json{{"id", v.id}, {"msp", v.msp}, {"kind", v.kind}, {"local", v.local}};
}

void from_json(const json& j, NodeRef& v) {
  j.at("id").get_to(v.id);
  j.at("msp").get_to(v.msp);
  j.at("kind").get_to(v.kind);
  v.local = j.value("local", false);
}

void to_json(json& j, const Transaction& v) {
  json reads = json::array();
  for (const auto& r : v.read_set) {
    json version = nullptr;
    if (r.version) version = json{{"block", r.version->block}, {"tx", r.version->tx}};
    reads.push_back(json{{"key", r.key}, {"version", version}});
  }
  json writes = json::array();
  for (const auto& w : v.write_set) {
    writes.push_back(json{{"key", w.key}, {"value_hash", w.value_hash}, {"is_delete", w.is_delete}});
  }
  j = json{{"tx_id", v.tx_id},
           {"block_num", v.block_num},
           {"tx_index", v.tx_index},
           {"timestamp", v.timestamp},
           {"creator_msp", v.creator_msp},
           {"chaincode", v.chaincode},
           {"tx_type", v.tx_type},
           {"size_bytes", v.size_bytes},
           {"read_set", std::move(reads)},
           {"write_set", std::move(writes)},
           {"validation_code", v.validation_code}};
}

void from_json(const json& j, Transaction& v) {
  j.at("tx_id").get_to(v.tx_id);
  j.at("block_num").get_to(v.block_num);
  j.at("tx_index").get_to(v.tx_index);
  j.at("timestamp").get_to(v.timestamp);
  j.at("creator_msp").get_to(v.creator_msp);
  j.at("chaincode").get_to(v.chaincode);
  j.at("tx_type").get_to(v.tx_type);
  j.at("size_bytes").get_to(v.size_bytes);
  v.read_set.clear();
  for (const auto& r : j.at("read_set")) {
    ReadItem item{r.at("key").get<std::string>(), std::nullopt};
    const auto& version = r.at("version");
    if (!version.is_null()) {
      item.version = KeyVersion{version.at("block").get<std::uint64_t>(),
                                version.at("tx").get<std::uint64_t>()};
    }
    v.read_set.push_back(std::move(item));
  }
  v.write_set.clear();
  for (const auto& w : j.at("write_set")) {
    v.write_set.push_back({w.at("key").get<std::string>(), w.at("value_hash").get<std::string>(),
                           w.value("is_delete", false)});
  }
  j.at("validation_code").get_to(v.validation_code);
}

void to_json(json& j, const Block& v) {
  j = json{{"number", v.number},       {"prev_hash", v.prev_hash}, {"data_hash", v.data_hash},
           {"timestamp", v.timestamp}, {"tx_count", v.tx_count},   {"transactions", v.transactions}};
}

void from_json(const json& j, Block& v) {
  j.at("number").get_to(v.number);
  j.at("prev_hash").get_to(v.prev_hash);
  j.at("data_hash").get_to(v.data_hash);
  j.at("timestamp").get_to(v.timestamp);
  j.at("tx_count").get_to(v.tx_count);
  j.at("transactions").get_to(v.transactions);
}

void to_json(json& j, const MetricSample& v) {
  j = json{{"timestamp", v.timestamp}, {"series", v.series}, {"labels", v.labels}, {"value", v.value}};
}

void from_json(const json& j, MetricSample& v) {
  j.at("timestamp").get_to(v.timestamp);
  j.at("series").get_to(v.series);
  v.labels = j.value("labels", Labels{});
  j.at("value").get_to(v.value);
}

void to_json(json& j, const LogLine& v) {
  j = json{{"timestamp", v.timestamp}, {"node", v.node}, {"level", v.level}, {"message", v.message}};
}

void from_json(const json& j, LogLine& v) {
  j.at("timestamp").get_to(v.timestamp);
  j.at("node").get_to(v.node);
  j.at("level").get_to(v.level);
  j.at("message").get_to(v.message);
}

void to_json(json& j, const Evidence& v) {
  std::visit(
      [&j](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, TxEvidence>) {
          j = json{{"type", "tx"}, {"tx_id", e.tx_id}};
        } else if constexpr (std::is_same_v<T, BlockEvidence>) {
          j = json{{"type", "block"}, {"number", e.number}};
        } else if constexpr (std::is_same_v<T, LinkEvidence>) {
          j = json{{"type", "link"}, {"source", e.source}, {"target", e.target}};
        } else if constexpr (std::is_same_v<T, ScanEvidence>) {
          j = json{{"type", "scan"}, {"report_id", e.report_id}};
        } else {
          j = json{{"type", "window"}, {"metric", e.metric}, {"labels", e.labels},
                   {"from", e.from},   {"to", e.to}};
        }
      },
      v);
}

void from_json(const json& j, Evidence& v) {
  const auto type = j.at("type").get<std::string>();
  if (type == "tx") {
    v = TxEvidence{j.at("tx_id").get<std::string>()};
  } else if (type == "block") {
    v = BlockEvidence{j.at("number").get<std::uint64_t>()};
  } else if (type == "link") {
    v = LinkEvidence{j.at("source").get<std::string>(), j.at("target").get<std::string>()};
  } else if (type == "scan") {
    v = ScanEvidence{j.at("report_id").get<std::string>()};
  } else if (type == "window") {
    v = WindowEvidence{j.at("metric").get<std::string>(), j.value("labels", Labels{}),
                       j.at("from").get<TimestampMs>(), j.at("to").get<TimestampMs>()};
  } else {
    throw std::invalid_argument("unknown evidence type: " + type);
  }
}

void to_json(json& j, const Alert& v) {
  j = json{{"alert_id", v.alert_id}, {"raised_at", v.raised_at},       {"rule", v.rule},
           {"severity", v.severity}, {"threat_codes", v.threat_codes}, {"summary", v.summary},
           {"evidence", v.evidence}};
}

void from_json(const json& j, Alert& v) {
  j.at("alert_id").get_to(v.alert_id);
  j.at("raised_at").get_to(v.raised_at);
  j.at("rule").get_to(v.rule);
  j.at("severity").get_to(v.severity);
  j.at("threat_codes").get_to(v.threat_codes);
  j.at("summary").get_to(v.summary);
  j.at("evidence").get_to(v.evidence);
}

void to_json(json& j, const ChaincodeIR& v) {
  json functions = json::array();
  for (const auto& f : v.functions) {
    json ops = json::array();
    for (const auto& op : f.ops) {
      json o{{"op", op.kind}};
      if (!op.arg.empty()) o["arg"] = op.arg;
      ops.push_back(std::move(o));
    }
    functions.push_back(json{{"name", f.name}, {"ops", std::move(ops)}});
  }
  j = json{{"name", v.name}, {"functions", std::move(functions)}};
}

void from_json(const json& j, ChaincodeIR& v) {
  j.at("name").get_to(v.name);
  v.functions.clear();
  for (const auto& f : j.at("functions")) {
    ChaincodeFunction fn;
    f.at("name").get_to(fn.name);
    for (const auto& o : f.at("ops")) {
      fn.ops.push_back({o.at("op").get<OpKind>(), o.value("arg", std::string{})});
    }
    v.functions.push_back(std::move(fn));
  }
}

void to_json(json& j, const ChaincodeDeployment& v) {
  j = v.chaincode;
  j["timestamp"] = v.timestamp;
}

void from_json(const json& j, ChaincodeDeployment& v) {
  j.at("timestamp").get_to(v.timestamp);
  j.get_to(v.chaincode);
}

void to_json(json& j, const Finding& v) {
  j = json{{"rule", v.rule},
           {"function", v.function},
           {"key_or_source", v.key_or_source},
           {"severity", v.severity}};
}

void from_json(const json& j, Finding& v) {
  j.at("rule").get_to(v.rule);
  j.at("function").get_to(v.function);
  j.at("key_or_source").get_to(v.key_or_source);
  j.at("severity").get_to(v.severity);
}

void to_json(json& j, const ScanReport& v) {
  j = json{{"report_id", v.report_id},
           {"chaincode", v.chaincode},
           {"scanned_at", v.scanned_at},
           {"findings", v.findings}};
}

void from_json(const json& j, ScanReport& v) {
  j.at("report_id").get_to(v.report_id);
  j.at("chaincode").get_to(v.chaincode);
  j.at("scanned_at").get_to(v.scanned_at);
  j.at("findings").get_to(v.findings);
}

void to_json(json& j, const Issue& v) {
  j = json{{"issue_id", v.issue_id}, {"title", v.title},     {"priority", v.priority},
           {"status", v.status},     {"updated", v.updated}, {"description", v.description}};
}

void from_json(const json& j, Issue& v) {
  j.at("issue_id").get_to(v.issue_id);
  j.at("title").get_to(v.title);
  j.at("priority").get_to(v.priority);
  v.status = j.value("status", std::string{});
  j.at("updated").get_to(v.updated);
  v.description = j.value("description", std::string{});
}

void to_json(json& j, const NetworkDescriptor& v) {
  j = json{{"msps", v.msps},
           {"local_msp", v.local_msp},
           {"peers_per_msp", v.peers_per_msp},
           {"orderers", v.orderers},
           {"seed", v.seed}};
}

void from_json(const json& j, NetworkDescriptor& v) {
  j.at("msps").get_to(v.msps);
  j.at("local_msp").get_to(v.local_msp);
  j.at("peers_per_msp").get_to(v.peers_per_msp);
  j.at("orderers").get_to(v.orderers);
  v.seed = j.value("seed", std::uint64_t{0});
}

void to_json(json& j, const StreamViolation& v) {
  j = json{{"kind", v.kind}, {"block_number", v.block_number}, {"detail", v.detail}};
}

}  // namespace ledgerwatch
