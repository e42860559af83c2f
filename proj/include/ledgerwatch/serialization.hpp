// SPDX-License-Identifier: Apache-2.0
//
// Canonical JSON form of the model types. One event per line, lower_snake_case
// field names, integer millisecond timestamps, enum values as UPPER_SNAKE names.
#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ledgerwatch/model.hpp"

namespace ledgerwatch {

using json = nlohmann::json;

template <typename E>
struct EnumTable;

#define LW_ENUM_TABLE(Type, ...)                                                        \
  template <>                                                                           \
  struct EnumTable<Type> {                                                              \
    static constexpr std::pair<Type, std::string_view> entries[] = {__VA_ARGS__};       \
  }

LW_ENUM_TABLE(NodeKind, {NodeKind::Peer, "PEER"}, {NodeKind::Orderer, "ORDERER"});
LW_ENUM_TABLE(TxType, {TxType::Endorser, "ENDORSER"}, {TxType::Config, "CONFIG"});
LW_ENUM_TABLE(ValidationCode, {ValidationCode::Valid, "VALID"},
              {ValidationCode::InvalidMvcc, "INVALID_MVCC"},
              {ValidationCode::InvalidOther, "INVALID_OTHER"});
LW_ENUM_TABLE(MetricSeries, {MetricSeries::GossipSent, "GOSSIP_SENT"},
              {MetricSeries::EndorsementDuration, "ENDORSEMENT_DURATION"},
              {MetricSeries::OrderingLatency, "ORDERING_LATENCY"},
              {MetricSeries::ValidationDuration, "VALIDATION_DURATION"});
LW_ENUM_TABLE(LogLevel, {LogLevel::Debug, "DEBUG"}, {LogLevel::Info, "INFO"},
              {LogLevel::Warn, "WARN"}, {LogLevel::Error, "ERROR"});
LW_ENUM_TABLE(ThreatCode, {ThreatCode::SC1, "SC1"}, {ThreatCode::SC2, "SC2"},
              {ThreatCode::SC3, "SC3"}, {ThreatCode::SC4, "SC4"}, {ThreatCode::N1, "N1"},
              {ThreatCode::N2, "N2"}, {ThreatCode::N3, "N3"}, {ThreatCode::C1, "C1"},
              {ThreatCode::C2, "C2"}, {ThreatCode::C3, "C3"}, {ThreatCode::C4, "C4"},
              {ThreatCode::AC1, "AC1"}, {ThreatCode::AC2, "AC2"}, {ThreatCode::AC3, "AC3"},
              {ThreatCode::AC4, "AC4"});
LW_ENUM_TABLE(ThreatBranch, {ThreatBranch::SmartContract, "SMART_CONTRACT"},
              {ThreatBranch::Network, "NETWORK"}, {ThreatBranch::Consensus, "CONSENSUS"},
              {ThreatBranch::AccessControl, "ACCESS_CONTROL"});
LW_ENUM_TABLE(AlertSeverity, {AlertSeverity::Info, "INFO"}, {AlertSeverity::Warning, "WARNING"},
              {AlertSeverity::High, "HIGH"});
LW_ENUM_TABLE(OpKind, {OpKind::Read, "READ"}, {OpKind::Write, "WRITE"},
              {OpKind::RangeRead, "RANGE_READ"}, {OpKind::Random, "RANDOM"},
              {OpKind::Timestamp, "TIMESTAMP"}, {OpKind::Other, "OTHER"});
LW_ENUM_TABLE(FindingRule, {FindingRule::ReadAfterWrite, "READ_AFTER_WRITE"},
              {FindingRule::Nondeterminism, "NONDETERMINISM"});
LW_ENUM_TABLE(FindingSeverity, {FindingSeverity::Low, "LOW"}, {FindingSeverity::Medium, "MEDIUM"},
              {FindingSeverity::High, "HIGH"});
LW_ENUM_TABLE(IssuePriority, {IssuePriority::Lowest, "LOWEST"}, {IssuePriority::Low, "LOW"},
              {IssuePriority::Medium, "MEDIUM"}, {IssuePriority::High, "HIGH"},
              {IssuePriority::Highest, "HIGHEST"});
LW_ENUM_TABLE(ViolationKind, {ViolationKind::Gap, "GAP"}, {ViolationKind::OutOfOrder, "OUT_OF_ORDER"},
              {ViolationKind::HashMismatch, "HASH_MISMATCH"},
              {ViolationKind::TxCountMismatch, "TX_COUNT_MISMATCH"},
              {ViolationKind::EmptyBlock, "EMPTY_BLOCK"},
              {ViolationKind::TxBlockMismatch, "TX_BLOCK_MISMATCH"},
              {ViolationKind::DuplicateTxIndex, "DUPLICATE_TX_INDEX"},
              {ViolationKind::ConfigWithChaincode, "CONFIG_WITH_CHAINCODE"},
              {ViolationKind::NonPositiveSize, "NON_POSITIVE_SIZE"},
              {ViolationKind::TimestampRegression, "TIMESTAMP_REGRESSION"});

#undef LW_ENUM_TABLE

template <typename E>
  requires std::is_enum_v<E>
constexpr std::string_view to_string(E value) {
  for (const auto& [v, name] : EnumTable<E>::entries) {
    if (v == value) return name;
  }
  return "?";
}

/// Strict parse of an UPPER_SNAKE name, case-insensitive. nullopt on unknown names.
template <typename E>
  requires std::is_enum_v<E>
std::optional<E> parse_enum(std::string_view text) {
  for (const auto& [v, name] : EnumTable<E>::entries) {
    if (name.size() != text.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size() && same; ++i) {
      same = std::toupper(static_cast<unsigned char>(text[i])) == name[i];
    }
    if (same) return v;
  }
  return std::nullopt;
}

template <typename E>
  requires std::is_enum_v<E>
void to_json(json& j, E value) {
  j = std::string(to_string(value));
}

template <typename E>
  requires std::is_enum_v<E>
void from_json(const json& j, E& value) {
  auto parsed = parse_enum<E>(j.get<std::string>());
  if (!parsed) throw std::invalid_argument("unknown enum value: " + j.get<std::string>());
  value = *parsed;
}

void to_json(json& j, const NodeRef& v);
void from_json(const json& j, NodeRef& v);
void to_json(json& j, const Transaction& v);
void from_json(const json& j, Transaction& v);
void to_json(json& j, const Block& v);
void from_json(const json& j, Block& v);
void to_json(json& j, const MetricSample& v);
void from_json(const json& j, MetricSample& v);
void to_json(json& j, const LogLine& v);
void from_json(const json& j, LogLine& v);
void to_json(json& j, const Evidence& v);
void from_json(const json& j, Evidence& v);
void to_json(json& j, const Alert& v);
void from_json(const json& j, Alert& v);
void to_json(json& j, const ChaincodeIR& v);
void from_json(const json& j, ChaincodeIR& v);
void to_json(json& j, const ChaincodeDeployment& v);
void from_json(const json& j, ChaincodeDeployment& v);
void to_json(json& j, const Finding& v);
void from_json(const json& j, Finding& v);
void to_json(json& j, const ScanReport& v);
void from_json(const json& j, ScanReport& v);
void to_json(json& j, const Issue& v);
void from_json(const json& j, Issue& v);
void to_json(json& j, const NetworkDescriptor& v);
void from_json(const json& j, NetworkDescriptor& v);
void to_json(json& j, const StreamViolation& v);

/// Single-line canonical encoding (no trailing newline).
template <typename T>
std::string to_line(const T& value) {
  json j = value;
  return j.dump();
}

}  // namespace ledgerwatch
