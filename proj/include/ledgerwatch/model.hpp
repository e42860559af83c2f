// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ledgerwatch {

/// Integer UTC milliseconds.
using TimestampMs = std::int64_t;
using DurationMs = std::int64_t;
using MspId = std::string;
using Labels = std::map<std::string, std::string>;

inline constexpr DurationMs kSecond = 1000;
inline constexpr DurationMs kMinute = 60 * kSecond;
inline constexpr DurationMs kHour = 60 * kMinute;
inline constexpr DurationMs kDay = 24 * kHour;

enum class NodeKind { Peer, Orderer };

struct NodeRef {
  std::string id;
  MspId msp;
  NodeKind kind = NodeKind::Peer;
  bool local = false;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// ---------------------------------------------------------------------------
// Ledger stream

enum class TxType { Endorser, Config };
enum class ValidationCode { Valid, InvalidMvcc, InvalidOther };

struct KeyVersion {
  std::uint64_t block = 0;
  std::uint64_t tx = 0;

  friend auto operator<=>(const KeyVersion&, const KeyVersion&) = default;
};

struct ReadItem {
  std::string key;
  std::optional<KeyVersion> version;  // nullopt: key never written

  friend bool operator==(const ReadItem&, const ReadItem&) = default;
};

struct WriteItem {
  std::string key;
  std::string value_hash;
  bool is_delete = false;

  friend bool operator==(const WriteItem&, const WriteItem&) = default;
};

struct Transaction {
  std::string tx_id;
  std::uint64_t block_num = 0;
  std::uint32_t tx_index = 0;
  TimestampMs timestamp = 0;
  MspId creator_msp;
  std::string chaincode;  // empty for CONFIG
  TxType tx_type = TxType::Endorser;
  std::uint64_t size_bytes = 0;
  std::vector<ReadItem> read_set;
  std::vector<WriteItem> write_set;
  ValidationCode validation_code = ValidationCode::Valid;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Block {
  std::uint64_t number = 0;
  std::string prev_hash;
  std::string data_hash;
  TimestampMs timestamp = 0;
  std::uint32_t tx_count = 0;
  std::vector<Transaction> transactions;

  friend bool operator==(const Block&, const Block&) = default;
};

// ---------------------------------------------------------------------------
// Continuous streams

enum class MetricSeries { GossipSent, EndorsementDuration, OrderingLatency, ValidationDuration };

inline constexpr MetricSeries kLatencySeries[] = {
    MetricSeries::EndorsementDuration, MetricSeries::OrderingLatency,
    MetricSeries::ValidationDuration};

struct MetricSample {
  TimestampMs timestamp = 0;
  MetricSeries series = MetricSeries::GossipSent;
  Labels labels;  // GOSSIP_SENT: "source", "target"
  double value = 0.0;

  friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

enum class LogLevel { Debug, Info, Warn, Error };

struct LogLine {
  TimestampMs timestamp = 0;
  std::string node;
  LogLevel level = LogLevel::Info;
  std::string message;

  friend bool operator==(const LogLine&, const LogLine&) = default;
};

// ---------------------------------------------------------------------------
// Threat taxonomy

enum class ThreatCode { SC1, SC2, SC3, SC4, N1, N2, N3, C1, C2, C3, C4, AC1, AC2, AC3, AC4 };
enum class ThreatBranch { SmartContract, Network, Consensus, AccessControl };

std::span<const ThreatCode> all_threat_codes();
ThreatBranch branch_of(ThreatCode code);

// ---------------------------------------------------------------------------
// Detection output

enum class AlertSeverity { Info, Warning, High };

struct TxEvidence {
  std::string tx_id;
  friend bool operator==(const TxEvidence&, const TxEvidence&) = default;
};
struct BlockEvidence {
  std::uint64_t number = 0;
  friend bool operator==(const BlockEvidence&, const BlockEvidence&) = default;
};
struct LinkEvidence {
  std::string source;
  std::string target;
  friend bool operator==(const LinkEvidence&, const LinkEvidence&) = default;
};
struct ScanEvidence {
  std::string report_id;
  friend bool operator==(const ScanEvidence&, const ScanEvidence&) = default;
};
/// Half-open [from, to) window over a named metric, optionally narrowed by labels.
struct WindowEvidence {
  std::string metric;
  Labels labels;
  TimestampMs from = 0;
  TimestampMs to = 0;
  friend bool operator==(const WindowEvidence&, const WindowEvidence&) = default;
};

using Evidence = std::variant<TxEvidence, BlockEvidence, LinkEvidence, ScanEvidence, WindowEvidence>;

struct Alert {
  std::string alert_id;
  TimestampMs raised_at = 0;
  std::string rule;
  std::vector<ThreatCode> threat_codes;
  AlertSeverity severity = AlertSeverity::Info;
  std::string summary;
  std::vector<Evidence> evidence;

  friend bool operator==(const Alert&, const Alert&) = default;
};

// ---------------------------------------------------------------------------
// Chaincode analysis

enum class OpKind { Read, Write, RangeRead, Random, Timestamp, Other };

struct ChaincodeOp {
  OpKind kind = OpKind::Other;
  std::string arg;  // key for READ/WRITE, prefix for RANGE_READ, empty otherwise

  friend bool operator==(const ChaincodeOp&, const ChaincodeOp&) = default;
};

struct ChaincodeFunction {
  std::string name;
  std::vector<ChaincodeOp> ops;

  friend bool operator==(const ChaincodeFunction&, const ChaincodeFunction&) = default;
};

struct ChaincodeIR {
  std::string name;
  std::vector<ChaincodeFunction> functions;

  friend bool operator==(const ChaincodeIR&, const ChaincodeIR&) = default;
};

/// A chaincode install observed on the network; each one triggers a scan job.
struct ChaincodeDeployment {
  TimestampMs timestamp = 0;
  ChaincodeIR chaincode;

  friend bool operator==(const ChaincodeDeployment&, const ChaincodeDeployment&) = default;
};

enum class FindingRule { ReadAfterWrite, Nondeterminism };
enum class FindingSeverity { Low, Medium, High };

struct Finding {
  FindingRule rule = FindingRule::ReadAfterWrite;
  std::string function;
  std::string key_or_source;
  FindingSeverity severity = FindingSeverity::Low;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ScanReport {
  std::string report_id;
  std::string chaincode;
  TimestampMs scanned_at = 0;
  std::vector<Finding> findings;

  friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

enum class IssuePriority { Lowest, Low, Medium, High, Highest };

struct Issue {
  std::string issue_id;
  std::string title;
  IssuePriority priority = IssuePriority::Medium;
  std::string status;
  TimestampMs updated = 0;
  std::string description;

  friend bool operator==(const Issue&, const Issue&) = default;
};

// ---------------------------------------------------------------------------
// Network topology

struct NetworkDescriptor {
  std::vector<MspId> msps;
  MspId local_msp;
  std::uint32_t peers_per_msp = 1;
  std::vector<NodeRef> orderers;
  std::uint64_t seed = 0;

  friend bool operator==(const NetworkDescriptor&, const NetworkDescriptor&) = default;
};

/// Peer id naming shared by the simulator and the graph builder: "peer<j>.<org>".
std::string peer_id(const MspId& msp, std::uint32_t index);

/// All peers and orderers of the descriptor, local flags resolved.
std::vector<NodeRef> network_nodes(const NetworkDescriptor& net);

/// Empty string when valid, otherwise the first violated invariant.
std::string check_network(const NetworkDescriptor& net);

// ---------------------------------------------------------------------------
// Stream validation

enum class ViolationKind {
  Gap,
  OutOfOrder,
  HashMismatch,
  TxCountMismatch,
  EmptyBlock,
  TxBlockMismatch,
  DuplicateTxIndex,
  ConfigWithChaincode,
  NonPositiveSize,
  TimestampRegression,
};

struct StreamViolation {
  ViolationKind kind = ViolationKind::Gap;
  std::uint64_t block_number = 0;
  std::string detail;

  friend bool operator==(const StreamViolation&, const StreamViolation&) = default;
};

/// Where a stream continues from: the next expected number and the hash it must chain to.
struct ChainTip {
  std::uint64_t next_number = 0;
  std::string prev_hash;
};

std::vector<StreamViolation> validate_stream(std::span<const Block> blocks,
                                             const std::optional<ChainTip>& tip = std::nullopt);

/// Empty string when the sample is valid.
std::string check_sample(const MetricSample& sample);

/// Empty string when the alert satisfies its invariants.
std::string check_alert(const Alert& alert);

}  // namespace ledgerwatch
