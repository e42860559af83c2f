// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

namespace ledgerwatch {

namespace {

constexpr ThreatCode kAllCodes[] = {
    ThreatCode::SC1, ThreatCode::SC2, ThreatCode::SC3, ThreatCode::SC4, ThreatCode::N1,
    ThreatCode::N2,  ThreatCode::N3,  ThreatCode::C1,  ThreatCode::C2,  ThreatCode::C3,
    ThreatCode::C4,  ThreatCode::AC1, ThreatCode::AC2, ThreatCode::AC3, ThreatCode::AC4,
};

std::string org_label(const MspId& msp) {
  std::string org = msp;
  if (org.size() > 3 && org.ends_with("MSP")) org.resize(org.size() - 3);
  std::transform(org.begin(), org.end(), org.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return org;
}

}  // namespace

std::span<const ThreatCode> all_threat_codes() { return kAllCodes; }

ThreatBranch branch_of(ThreatCode code) {
  switch (code) {
    case ThreatCode::SC1:
    case ThreatCode::SC2:
    case ThreatCode::SC3:
    case ThreatCode::SC4:
      return ThreatBranch::SmartContract;
    case ThreatCode::N1:
    case ThreatCode::N2:
    case ThreatCode::N3:
      return ThreatBranch::Network;
    case ThreatCode::C1:
    case ThreatCode::C2:
    case ThreatCode::C3:
    case ThreatCode::C4:
      return ThreatBranch::Consensus;
    case ThreatCode::AC1:
    case ThreatCode::AC2:
    case ThreatCode::AC3:
    case ThreatCode::AC4:
      return ThreatBranch::AccessControl;
  }
  return ThreatBranch::SmartContract;
}

std::string peer_id(const MspId& msp, std::uint32_t index) {
  return "peer" + std::to_string(index) + "." + org_label(msp);
}

std::vector<NodeRef> network_nodes(const NetworkDescriptor& net) {
  std::vector<NodeRef> nodes;
  for (const auto& msp : net.msps) {
    for (std::uint32_t j = 0; j < net.peers_per_msp; ++j) {
      nodes.push_back({peer_id(msp, j), msp, NodeKind::Peer, msp == net.local_msp});
    }
  }
  for (auto orderer : net.orderers) {
    orderer.local = orderer.msp == net.local_msp;
    nodes.push_back(std::move(orderer));
  }
  return nodes;
}

std::string check_network(const NetworkDescriptor& net) {
  if (net.msps.size() < 2) return "at least two MSPs are required";
  std::set<MspId> unique;
  for (const auto& msp : net.msps) {
    if (msp.empty()) return "MSP identifiers must be non-empty";
    if (!unique.insert(msp).second) return "duplicate MSP " + msp;
  }
  if (!unique.contains(net.local_msp)) return "local MSP is not part of the network";
  if (net.peers_per_msp == 0) return "peers_per_msp must be positive";
  if (net.orderers.empty()) return "at least one orderer is required";
  std::set<std::string> ids;
  for (const auto& node : network_nodes(net)) {
    if (!ids.insert(node.id).second) return "duplicate node id " + node.id;
  }
  for (const auto& o : net.orderers) {
    if (o.kind != NodeKind::Orderer) return "orderer " + o.id + " has kind PEER";
    if (!unique.contains(o.msp)) return "orderer " + o.id + " has unknown MSP";
  }
  return {};
}

std::vector<StreamViolation> validate_stream(std::span<const Block> blocks,
                                             const std::optional<ChainTip>& tip) {
  std::vector<StreamViolation> out;
  std::uint64_t expected = tip ? tip->next_number : 0;
  std::optional<std::string> prev_hash;
  if (tip && !tip->prev_hash.empty()) prev_hash = tip->prev_hash;

  for (const auto& block : blocks) {
    const auto n = block.number;
    if (n > expected) {
      out.push_back({ViolationKind::Gap, expected,
                     "missing blocks " + std::to_string(expected) + ".." + std::to_string(n - 1)});
      expected = n + 1;
      prev_hash = block.data_hash;
    } else if (n < expected) {
      out.push_back({ViolationKind::OutOfOrder, n,
                     "block " + std::to_string(n) + " repeats or precedes " +
                         std::to_string(expected - 1)});
      continue;
    } else {
      if (prev_hash && block.prev_hash != *prev_hash) {
        out.push_back({ViolationKind::HashMismatch, n,
                       "prev_hash " + block.prev_hash + " does not chain to " + *prev_hash});
      }
      expected = n + 1;
      prev_hash = block.data_hash;
    }

    if (block.tx_count == 0 && block.transactions.empty()) {
      out.push_back({ViolationKind::EmptyBlock, n, "block carries no transactions"});
    } else if (block.tx_count != block.transactions.size()) {
      out.push_back({ViolationKind::TxCountMismatch, n,
                     "tx_count " + std::to_string(block.tx_count) + " but " +
                         std::to_string(block.transactions.size()) + " transactions"});
    }

    std::unordered_set<std::uint32_t> indexes;
    TimestampMs last_ts = block.transactions.empty() ? 0 : block.transactions.front().timestamp;
    for (const auto& tx : block.transactions) {
      if (tx.block_num != n) {
        out.push_back({ViolationKind::TxBlockMismatch, n,
                       tx.tx_id + " claims block " + std::to_string(tx.block_num)});
      }
      if (!indexes.insert(tx.tx_index).second) {
        out.push_back({ViolationKind::DuplicateTxIndex, n,
                       "tx_index " + std::to_string(tx.tx_index) + " repeated"});
      }
      if (tx.tx_type == TxType::Config && !tx.chaincode.empty()) {
        out.push_back({ViolationKind::ConfigWithChaincode, n, tx.tx_id + " names " + tx.chaincode});
      }
      if (tx.size_bytes == 0) {
        out.push_back({ViolationKind::NonPositiveSize, n, tx.tx_id + " has size 0"});
      }
      if (tx.timestamp < last_ts) {
        out.push_back({ViolationKind::TimestampRegression, n, tx.tx_id + " goes back in time"});
      }
      last_ts = std::max(last_ts, tx.timestamp);
    }
  }
  return out;
}

std::string check_sample(const MetricSample& sample) {
  if (!std::isfinite(sample.value) || sample.value < 0.0) return "value must be finite and >= 0";
  if (sample.series == MetricSeries::GossipSent) {
    if (!sample.labels.contains("source") || !sample.labels.contains("target")) {
      return "GOSSIP_SENT requires source and target labels";
    }
  } else if (!sample.labels.empty()) {
    return "latency series carry no labels";
  }
  return {};
}

std::string check_alert(const Alert& alert) {
  if (alert.alert_id.empty()) return "alert_id is empty";
  if (alert.threat_codes.empty()) return "alert has no threat codes";
  if (alert.evidence.empty()) return "alert has no evidence";
  return {};
}

}  // namespace ledgerwatch
