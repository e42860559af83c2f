// SPDX-License-Identifier: Apache-2.0
//
// Deterministic generator for the event streams of a small Fabric-like network,
// with injectable attack scenarios. Output is a pure function of the inputs.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ledgerwatch/layout.hpp"
#include "ledgerwatch/model.hpp"

namespace ledgerwatch::sim {

/// Trace timestamps start here (2024-01-01T00:00:00Z, aligned to every granularity).
inline constexpr TimestampMs kTraceEpoch = 1'704'067'200'000;

inline constexpr DurationMs kBatchTimeout = 2 * kSecond;
inline constexpr std::size_t kMaxBatchSize = 10;
inline constexpr DurationMs kScrapeInterval = 15 * kSecond;
inline constexpr std::uint64_t kMedianTxBytes = 3 * 1024;
inline constexpr double kTxSizeSigma = 0.5;
inline constexpr double kOrderingCapacityTps = 40.0;
inline constexpr std::size_t kExploitBurst = 20;
inline constexpr const char* kVulnerableChaincode = "vulncc";

enum class ScenarioKind { Baseline, Sc2VulnChaincode, N2TxFlood, N2TxSize, N2LinkDos, Ac1ConfigChange };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Baseline;
  DurationMs start_offset = 0;
  DurationMs duration = 0;
  double magnitude = 1.0;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

std::string_view to_string(ScenarioKind kind);  // lower_snake, as used on the command line
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);
std::span<const ScenarioKind> all_scenario_kinds();

/// Default placement and magnitude of a scenario inside a trace of the given length.
ScenarioSpec default_scenario(ScenarioKind kind, DurationMs length);

/// Parses `kind[@start[+duration]][*magnitude]`, e.g. "n2_tx_flood@30m+10m*50". Missing parts
/// take the defaults for the given trace length. Throws SimulationError on malformed input.
ScenarioSpec parse_scenario(std::string_view text, DurationMs length);

class SimulationError : public std::runtime_error {
 public:
  enum class Code { InvalidScenario, InvalidNetwork, InvalidParameters };
  SimulationError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// `msps` organizations named Org1MSP..OrgNMSP, Org1MSP local, one orderer per organization.
NetworkDescriptor make_network(std::uint32_t msps, std::uint32_t peers_per_msp, std::uint64_t seed,
                               std::uint32_t orderers_per_msp = 1);

/// The organization that plays the attacker in N2 and AC1 scenarios (the last foreign MSP).
const MspId& attacker_msp(const NetworkDescriptor& net);

/// The gossip link an N2_LINK_DOS scenario floods: first local peer to second local node.
std::pair<std::string, std::string> dos_target_link(const NetworkDescriptor& net);

/// A transaction submitted by a client but not yet ordered into a block.
struct PendingTx {
  TimestampMs arrival = 0;
  MspId creator;
  std::string chaincode;
  TxType type = TxType::Endorser;
  std::uint64_t size_bytes = 0;
  std::vector<std::string> reads;
  std::vector<std::string> writes;
  bool fails_endorsement = false;
};

/// Everything clients submit and deploy during a run, before ordering.
struct Workload {
  TimestampMs start = kTraceEpoch;
  DurationMs length = 0;
  std::vector<PendingTx> arrivals;
  std::vector<ChaincodeDeployment> chaincodes;
};

/// Adds the read-after-write chaincode and a burst of exploit transactions against it.
Workload inject_sc2(Workload workload, const ScenarioSpec& scenario, const NetworkDescriptor& net);

struct EventTrace {
  NetworkDescriptor network;
  TimestampMs start = kTraceEpoch;
  DurationMs length = 0;
  double baseline_tps = 0.0;
  std::vector<ScenarioSpec> scenarios;
  std::vector<Block> blocks;
  std::vector<MetricSample> metrics;
  std::vector<LogLine> logs;
  std::vector<ChaincodeDeployment> chaincodes;
  std::vector<Issue> issues;

  std::size_t transaction_count() const;
};

EventTrace simulate(const NetworkDescriptor& net, const std::vector<ScenarioSpec>& scenarios,
                    DurationMs length, double baseline_tps);

/// Writes every stream as newline-delimited JSON. Throws std::runtime_error on I/O failure.
void write_trace(const EventTrace& trace, const std::filesystem::path& dir);

}  // namespace ledgerwatch::sim
