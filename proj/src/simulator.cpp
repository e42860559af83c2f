// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/util.hpp"

namespace ledgerwatch::sim {

namespace {

constexpr std::pair<ScenarioKind, std::string_view> kKindNames[] = {
    {ScenarioKind::Baseline, "baseline"},
    {ScenarioKind::Sc2VulnChaincode, "sc2_vuln_chaincode"},
    {ScenarioKind::N2TxFlood, "n2_tx_flood"},
    {ScenarioKind::N2TxSize, "n2_tx_size"},
    {ScenarioKind::N2LinkDos, "n2_link_dos"},
    {ScenarioKind::Ac1ConfigChange, "ac1_config_change"},
};

constexpr ScenarioKind kAllKinds[] = {
    ScenarioKind::Baseline,  ScenarioKind::Sc2VulnChaincode, ScenarioKind::N2TxFlood,
    ScenarioKind::N2TxSize,  ScenarioKind::N2LinkDos,        ScenarioKind::Ac1ConfigChange,
};

// Independent random streams so that a scenario never perturbs the draws of another stream.
enum RngStream : std::uint64_t {
  kArrivalStream = 1,
  kGossipStream = 2,
  kLatencyStream = 3,
  kLogStream = 4,
  kScenarioStreamBase = 100,
};

constexpr const char* kChannel = "mychannel";
constexpr double kEndorsementFailureRate = 0.002;
constexpr double kLatencyNoiseSigma = 0.25;
constexpr double kEndorsementMedianS = 0.05;
constexpr double kOrderingMedianS = 0.8;
constexpr double kValidationMedianS = 0.15;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix64(seed ^ mix64(stream)));
}

std::uint64_t draw_size(std::mt19937_64& rng) {
  std::lognormal_distribution<double> dist(std::log(static_cast<double>(kMedianTxBytes)),
                                           kTxSizeSigma);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(dist(rng))));
}

template <typename Fn>
void poisson_arrivals(std::mt19937_64& rng, double rate_per_s, TimestampMs from, TimestampMs to,
                      Fn&& emit) {
  if (rate_per_s <= 0.0) return;
  std::exponential_distribution<double> gap(rate_per_s / 1000.0);
  double t = static_cast<double>(from);
  for (;;) {
    t += gap(rng);
    if (t >= static_cast<double>(to)) break;
    emit(static_cast<TimestampMs>(std::floor(t)));
  }
}

PendingTx baseline_tx(std::mt19937_64& rng, const MspId& creator, TimestampMs at) {
  PendingTx tx;
  tx.arrival = at;
  tx.creator = creator;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.7) {
    tx.chaincode = "assetcc";
    const auto key = "asset_" + std::to_string(std::uniform_int_distribution<int>(0, 999)(rng));
    tx.reads.push_back(key);
    if (unit(rng) < 0.8) tx.writes.push_back(key);
  } else {
    tx.chaincode = "paymentcc";
    std::uniform_int_distribution<int> account(0, 499);
    const int from = account(rng);
    int to = account(rng);
    if (to == from) to = (to + 1) % 500;
    const auto a = "acct_" + std::to_string(from);
    const auto b = "acct_" + std::to_string(to);
    tx.reads = {a, b};
    tx.writes = {a, b};
  }
  tx.size_bytes = draw_size(rng);
  tx.fails_endorsement = unit(rng) < kEndorsementFailureRate;
  return tx;
}

ChaincodeIR asset_chaincode() {
  return {"assetcc",
          {
              {"createAsset", {{OpKind::Read, "asset"}, {OpKind::Write, "asset"}}},
              {"transferAsset", {{OpKind::Read, "asset"}, {OpKind::Other, ""}, {OpKind::Write, "asset"}}},
              {"readAsset", {{OpKind::Read, "asset"}}},
              {"queryByOwner", {{OpKind::RangeRead, "asset_"}}},
          }};
}

ChaincodeIR payment_chaincode() {
  return {"paymentcc",
          {
              {"pay",
               {{OpKind::Read, "from"}, {OpKind::Read, "to"}, {OpKind::Write, "from"},
                {OpKind::Write, "to"}}},
              {"balance", {{OpKind::Read, "account"}}},
          }};
}

ChaincodeIR vulnerable_chaincode() {
  return {kVulnerableChaincode,
          {
              {"init", {{OpKind::Write, "owner"}}},
              {"transfer",
               {{OpKind::Read, "balance"}, {OpKind::Write, "pending"}, {OpKind::Read, "pending"},
                {OpKind::Write, "balance"}}},
              {"balanceOf", {{OpKind::Read, "balance"}}},
          }};
}

std::vector<Issue> issue_fixture(TimestampMs start) {
  const auto ago = [start](DurationMs d) { return start - d; };
  return {
      {"FAB-18211", "Gossip state transfer stalls after leader re-election", IssuePriority::Highest,
       "Open", ago(2 * kDay), "Peers stop pulling missing blocks once the elected leader changes."},
      {"FAB-18190", "Orderer accepts oversized envelopes under batch pressure", IssuePriority::High,
       "In Progress", ago(3 * kDay), "AbsoluteMaxBytes is not enforced on the broadcast fast path."},
      {"FAB-18102", "Chaincode container log rotation drops lines", IssuePriority::Medium, "Open",
       ago(3 * kDay), "Rotated files lose the last buffered writes."},
      {"FAB-18077", "Peer CLI help text typo for --peerAddresses", IssuePriority::Lowest, "Open",
       ago(4 * kDay), "Cosmetic."},
      {"FAB-18050", "Channel config update bypasses mod_policy check for MSP definition",
       IssuePriority::Highest, "Open", ago(5 * kDay),
       "A crafted config update can replace an organization MSP without the admins policy."},
      {"FAB-18021", "Private data reconciliation retries without backoff", IssuePriority::High,
       "Open", ago(5 * kDay), "Reconciler hammers remote peers when collections are misconfigured."},
      {"FAB-17999", "Discovery service returns stale endorsement layouts", IssuePriority::High,
       "Resolved", ago(5 * kDay), "Layouts are cached across membership changes."},
      {"FAB-17954", "Prometheus label cardinality grows with chaincode versions",
       IssuePriority::Low, "Open", ago(6 * kDay), "Each upgrade adds a label set that is never removed."},
      {"FAB-17930", "Ledger snapshot request silently ignored on busy peer", IssuePriority::Medium,
       "In Progress", ago(8 * kDay), "Requests submitted during commit are dropped."},
      {"FAB-17888", "TLS certificate expiry warning not logged for orderer clients",
       IssuePriority::Low, "Closed", ago(9 * kDay), "Only peers emit the warning."},
  };
}

struct Batch {
  std::vector<std::size_t> members;
  TimestampMs cut_at = 0;
};

std::vector<Batch> cut_blocks(const std::vector<PendingTx>& arrivals, TimestampMs trace_end) {
  std::vector<Batch> blocks;
  Batch current;
  TimestampMs batch_start = 0;

  auto cut = [&blocks](Batch& batch, TimestampMs at) {
    batch.cut_at = at;
    blocks.push_back(std::move(batch));
    batch = Batch{};
  };

  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const auto& tx = arrivals[i];
    if (!current.members.empty() && tx.arrival >= batch_start + kBatchTimeout) {
      cut(current, batch_start + kBatchTimeout);
    }
    if (tx.type == TxType::Config) {
      // Config transactions are always ordered into a block of their own.
      if (!current.members.empty()) cut(current, tx.arrival);
      Batch alone;
      alone.members.push_back(i);
      cut(alone, tx.arrival);
      continue;
    }
    if (current.members.empty()) batch_start = tx.arrival;
    current.members.push_back(i);
    if (current.members.size() == kMaxBatchSize) cut(current, tx.arrival);
  }
  if (!current.members.empty()) {
    cut(current, std::min(batch_start + kBatchTimeout, trace_end - 1));
  }
  return blocks;
}

std::string make_tx_id(std::uint64_t seed, std::uint64_t counter) {
  return to_hex(mix64(seed ^ (counter * 2 + 1))) + to_hex(mix64(~seed ^ (counter * 2 + 2)));
}

std::vector<Block> commit_blocks(const std::vector<PendingTx>& arrivals,
                                 const std::vector<Batch>& batches, std::uint64_t seed) {
  std::vector<Block> blocks;
  blocks.reserve(batches.size());
  std::unordered_map<std::string, KeyVersion> state;
  std::string prev_hash(16, '0');
  std::uint64_t counter = 0;

  for (std::size_t n = 0; n < batches.size(); ++n) {
    Block block;
    block.number = n;
    block.prev_hash = prev_hash;
    block.timestamp = batches[n].cut_at;

    std::unordered_set<std::string> written_in_block;
    std::vector<std::pair<std::string, KeyVersion>> updates;
    std::string digest = prev_hash + std::to_string(n);

    for (std::size_t i = 0; i < batches[n].members.size(); ++i) {
      const auto& pending = arrivals[batches[n].members[i]];
      Transaction tx;
      tx.tx_id = make_tx_id(seed, counter++);
      tx.block_num = n;
      tx.tx_index = static_cast<std::uint32_t>(i);
      tx.timestamp = pending.arrival;
      tx.creator_msp = pending.creator;
      tx.chaincode = pending.chaincode;
      tx.tx_type = pending.type;
      tx.size_bytes = pending.size_bytes;

      bool stale = false;
      for (const auto& key : pending.reads) {
        auto it = state.find(key);
        tx.read_set.push_back(
            {key, it == state.end() ? std::nullopt : std::optional<KeyVersion>(it->second)});
        stale = stale || written_in_block.contains(key);
      }
      for (const auto& key : pending.writes) {
        tx.write_set.push_back({key, to_hex(fnv1a64(key, fnv1a64(tx.tx_id))), false});
      }

      if (pending.fails_endorsement) {
        tx.validation_code = ValidationCode::InvalidOther;
      } else if (stale) {
        tx.validation_code = ValidationCode::InvalidMvcc;
      } else {
        tx.validation_code = ValidationCode::Valid;
        for (const auto& key : pending.writes) {
          written_in_block.insert(key);
          updates.emplace_back(key, KeyVersion{n, i});
        }
      }
      digest += tx.tx_id;
      block.transactions.push_back(std::move(tx));
    }
    for (auto& [key, version] : updates) state[key] = version;

    block.tx_count = static_cast<std::uint32_t>(block.transactions.size());
    block.data_hash = to_hex(fnv1a64(digest));
    prev_hash = block.data_hash;
    blocks.push_back(std::move(block));
  }
  return blocks;
}

struct GossipLink {
  std::string source;
  std::string target;
  double rate;  // mean messages per scrape interval
};

std::vector<GossipLink> gossip_links(const NetworkDescriptor& net) {
  std::vector<NodeRef> local;
  for (const auto& node : network_nodes(net)) {
    if (node.local) local.push_back(node);
  }
  std::vector<GossipLink> links;
  for (const auto& a : local) {
    for (const auto& b : local) {
      if (a.id == b.id) continue;
      const double rate = 20.0 + static_cast<double>(fnv1a64(a.id + ">" + b.id) % 30);
      links.push_back({a.id, b.id, rate});
    }
  }
  std::sort(links.begin(), links.end(), [](const auto& x, const auto& y) {
    return std::tie(x.source, x.target) < std::tie(y.source, y.target);
  });
  return links;
}

std::vector<MetricSample> generate_metrics(const NetworkDescriptor& net,
                                           const std::vector<ScenarioSpec>& scenarios,
                                           const std::vector<PendingTx>& arrivals,
                                           TimestampMs start, DurationMs length) {
  auto gossip_rng = make_rng(net.seed, kGossipStream);
  auto latency_rng = make_rng(net.seed, kLatencyStream);
  std::lognormal_distribution<double> noise(0.0, kLatencyNoiseSigma);

  const auto links = gossip_links(net);
  const auto target = dos_target_link(net);

  std::vector<MetricSample> out;
  const TimestampMs end = start + length;
  std::size_t next_arrival = 0;
  double queue = 0.0;

  for (TimestampMs t = start + kScrapeInterval; t <= end; t += kScrapeInterval) {
    std::size_t arrived = 0;
    while (next_arrival < arrivals.size() && arrivals[next_arrival].arrival < t) {
      ++arrived;
      ++next_arrival;
    }
    const double capacity = kOrderingCapacityTps * (kScrapeInterval / kSecond);
    queue = std::max(0.0, queue + static_cast<double>(arrived) - capacity);
    const double load_factor = queue / kOrderingCapacityTps;

    const std::pair<MetricSeries, double> latency[] = {
        {MetricSeries::EndorsementDuration, kEndorsementMedianS},
        {MetricSeries::OrderingLatency, kOrderingMedianS},
        {MetricSeries::ValidationDuration, kValidationMedianS},
    };
    for (const auto& [series, median] : latency) {
      out.push_back({t, series, {}, median * noise(latency_rng) * (1.0 + load_factor)});
    }

    for (const auto& link : links) {
      std::poisson_distribution<int> count(link.rate);
      double value = static_cast<double>(count(gossip_rng));
      for (const auto& s : scenarios) {
        if (s.kind != ScenarioKind::N2LinkDos) continue;
        const auto offset = t - start;
        if (link.source == target.first && link.target == target.second &&
            offset >= s.start_offset && offset < s.start_offset + s.duration) {
          value *= s.magnitude;
        }
      }
      out.push_back({t, MetricSeries::GossipSent, {{"source", link.source}, {"target", link.target}},
                     value});
    }
  }
  return out;
}

std::vector<LogLine> generate_logs(const NetworkDescriptor& net, const std::vector<Block>& blocks,
                                   const std::vector<ChaincodeDeployment>& chaincodes,
                                   TimestampMs start, DurationMs length) {
  auto rng = make_rng(net.seed, kLogStream);
  std::uniform_int_distribution<int> delay(5, 40);

  std::vector<NodeRef> local_peers;
  std::vector<NodeRef> local_orderers;
  for (const auto& node : network_nodes(net)) {
    if (!node.local) continue;
    (node.kind == NodeKind::Peer ? local_peers : local_orderers).push_back(node);
  }

  std::vector<LogLine> logs;
  const std::string channel = std::string("[") + kChannel + "] ";

  for (const auto& block : blocks) {
    const auto n = std::to_string(block.number);
    for (const auto& orderer : local_orderers) {
      logs.push_back({block.timestamp, orderer.id, LogLevel::Info,
                      channel + "Created block [" + n + "] with " +
                          std::to_string(block.tx_count) + " transaction(s)"});
    }
    const bool config = block.transactions.size() == 1 &&
                        block.transactions.front().tx_type == TxType::Config;
    for (const auto& peer : local_peers) {
      const auto at = block.timestamp + delay(rng);
      if (config) {
        logs.push_back({at, peer.id, LogLevel::Info,
                        channel + "Received config transaction, updating channel configuration"});
      }
      logs.push_back({at, peer.id, LogLevel::Info,
                      channel + "Committed block [" + n + "] with " +
                          std::to_string(block.tx_count) + " transaction(s) in " +
                          std::to_string(delay(rng)) + "ms"});
    }
    if (!local_peers.empty()) {
      for (const auto& tx : block.transactions) {
        if (tx.validation_code == ValidationCode::Valid) continue;
        const char* reason = tx.validation_code == ValidationCode::InvalidMvcc
                                 ? "MVCC_READ_CONFLICT"
                                 : "ENDORSEMENT_POLICY_FAILURE";
        logs.push_back({block.timestamp + delay(rng), local_peers.front().id, LogLevel::Warn,
                        channel + "Validation of transaction " + tx.tx_id + " failed: " + reason});
      }
    }
  }

  for (const auto& deployment : chaincodes) {
    for (const auto& peer : local_peers) {
      logs.push_back({deployment.timestamp, peer.id, LogLevel::Info,
                      "Installed chaincode " + deployment.chaincode.name});
    }
  }

  static constexpr const char* kWarnings[] = {
      "Failed connecting to remote peer: context deadline exceeded",
      "Slow block delivery: behind orderer by more than 1s",
      "Endorsement took longer than expected",
  };
  static constexpr const char* kErrors[] = {
      "Deliver stream closed unexpectedly, reconnecting",
      "Failed to fetch private data from remote peers",
  };
  const TimestampMs end = start + length;
  std::vector<NodeRef> local_nodes = local_peers;
  local_nodes.insert(local_nodes.end(), local_orderers.begin(), local_orderers.end());
  for (const auto& node : local_nodes) {
    poisson_arrivals(rng, 1.0 / 30.0, start, end, [&](TimestampMs t) {
      logs.push_back({t, node.id, LogLevel::Debug, "Gossip membership heartbeat"});
    });
    poisson_arrivals(rng, 1.0 / 900.0, start, end, [&](TimestampMs t) {
      logs.push_back({t, node.id, LogLevel::Warn, kWarnings[t % std::size(kWarnings)]});
    });
    poisson_arrivals(rng, 1.0 / 2700.0, start, end, [&](TimestampMs t) {
      logs.push_back({t, node.id, LogLevel::Error, kErrors[t % std::size(kErrors)]});
    });
  }

  std::stable_sort(logs.begin(), logs.end(),
                   [](const LogLine& a, const LogLine& b) { return a.timestamp < b.timestamp; });
  return logs;
}

void validate_inputs(const NetworkDescriptor& net, const std::vector<ScenarioSpec>& scenarios,
                     DurationMs length, double baseline_tps) {
  if (auto problem = check_network(net); !problem.empty()) {
    throw SimulationError(SimulationError::Code::InvalidNetwork, problem);
  }
  if (length <= 0) {
    throw SimulationError(SimulationError::Code::InvalidParameters, "length must be positive");
  }
  if (!(baseline_tps > 0.0) || !std::isfinite(baseline_tps)) {
    throw SimulationError(SimulationError::Code::InvalidParameters,
                          "baseline_tps must be positive and finite");
  }
  for (const auto& s : scenarios) {
    const std::string name(to_string(s.kind));
    if (s.start_offset < 0 || s.duration < 0 || s.start_offset + s.duration > length) {
      throw SimulationError(SimulationError::Code::InvalidScenario,
                            name + " window exceeds the simulation length");
    }
    if (!(s.magnitude >= 1.0) || !std::isfinite(s.magnitude)) {
      throw SimulationError(SimulationError::Code::InvalidScenario, name + " magnitude must be >= 1");
    }
    const bool needs_window = s.kind == ScenarioKind::N2TxFlood ||
                              s.kind == ScenarioKind::N2TxSize || s.kind == ScenarioKind::N2LinkDos;
    if (needs_window && s.duration == 0) {
      throw SimulationError(SimulationError::Code::InvalidScenario, name + " needs a duration");
    }
  }
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& [k, name] : kKindNames) {
    if (name == lower) return k;
  }
  return std::nullopt;
}

std::span<const ScenarioKind> all_scenario_kinds() { return kAllKinds; }

ScenarioSpec default_scenario(ScenarioKind kind, DurationMs length) {
  auto place = [length](double at, DurationMs duration, double magnitude, ScenarioKind k) {
    const auto start = align_down(static_cast<DurationMs>(static_cast<double>(length) * at), kMinute);
    return ScenarioSpec{k, start, std::min(duration, length - start), magnitude};
  };
  switch (kind) {
    case ScenarioKind::Baseline:
      return {ScenarioKind::Baseline, 0, 0, 1.0};
    case ScenarioKind::Sc2VulnChaincode:
      return place(0.25, 5 * kMinute, 1.0, kind);
    case ScenarioKind::N2TxFlood:
      return place(0.4, 10 * kMinute, 50.0, kind);
    case ScenarioKind::N2TxSize:
      return place(0.6, 5 * kMinute, 100.0, kind);
    case ScenarioKind::N2LinkDos:
      return place(0.5, length, 10.0, kind);
    case ScenarioKind::Ac1ConfigChange:
      return place(0.75, kMinute, 1.0, kind);
  }
  return {};
}

ScenarioSpec parse_scenario(std::string_view text, DurationMs length) {
  auto fail = [&text](const std::string& why) {
    return SimulationError(SimulationError::Code::InvalidScenario,
                           "bad scenario '" + std::string(text) + "': " + why);
  };
  const auto kind_end = text.find_first_of("@*");
  const auto kind = parse_scenario_kind(text.substr(0, kind_end));
  if (!kind) throw fail("unknown kind");
  auto spec = default_scenario(*kind, length);
  if (kind_end == std::string_view::npos) return spec;

  std::string_view rest = text.substr(kind_end);
  if (rest.starts_with('@')) {
    rest.remove_prefix(1);
    const auto stop = rest.find_first_of("+*");
    const auto start = parse_duration(rest.substr(0, stop));
    if (!start) throw fail("bad start offset");
    spec.start_offset = *start;
    rest = stop == std::string_view::npos ? std::string_view{} : rest.substr(stop);
    if (rest.starts_with('+')) {
      rest.remove_prefix(1);
      const auto dstop = rest.find('*');
      const auto duration = parse_duration(rest.substr(0, dstop));
      if (!duration) throw fail("bad duration");
      spec.duration = *duration;
      rest = dstop == std::string_view::npos ? std::string_view{} : rest.substr(dstop);
    } else {
      spec.duration = std::min(spec.duration, std::max<DurationMs>(0, length - spec.start_offset));
    }
  }
  if (rest.starts_with('*')) {
    rest.remove_prefix(1);
    try {
      std::size_t used = 0;
      spec.magnitude = std::stod(std::string(rest), &used);
      if (used != rest.size()) throw fail("bad magnitude");
    } catch (const std::logic_error&) {
      throw fail("bad magnitude");
    }
    rest = {};
  }
  if (!rest.empty()) throw fail("trailing characters");
  return spec;
}

NetworkDescriptor make_network(std::uint32_t msps, std::uint32_t peers_per_msp, std::uint64_t seed,
                               std::uint32_t orderers_per_msp) {
  NetworkDescriptor net;
  for (std::uint32_t i = 1; i <= msps; ++i) net.msps.push_back("Org" + std::to_string(i) + "MSP");
  net.local_msp = net.msps.empty() ? MspId{} : net.msps.front();
  net.peers_per_msp = peers_per_msp;
  net.seed = seed;
  for (std::uint32_t i = 1; i <= msps; ++i) {
    for (std::uint32_t j = 0; j < orderers_per_msp; ++j) {
      net.orderers.push_back({"orderer" + std::to_string(j) + ".org" + std::to_string(i),
                              net.msps[i - 1], NodeKind::Orderer, i == 1});
    }
  }
  return net;
}

const MspId& attacker_msp(const NetworkDescriptor& net) {
  for (auto it = net.msps.rbegin(); it != net.msps.rend(); ++it) {
    if (*it != net.local_msp) return *it;
  }
  return net.local_msp;
}

std::pair<std::string, std::string> dos_target_link(const NetworkDescriptor& net) {
  std::vector<std::string> local;
  for (const auto& node : network_nodes(net)) {
    if (node.local) local.push_back(node.id);
  }
  if (local.size() < 2) return {};
  return {local[0], local[1]};
}

Workload inject_sc2(Workload workload, const ScenarioSpec& scenario, const NetworkDescriptor& net) {
  const TimestampMs deployed = workload.start + scenario.start_offset;
  const TimestampMs last = workload.start + workload.length - 1;
  workload.chaincodes.push_back({deployed, vulnerable_chaincode()});

  // Exploits start a second after deployment, spread across at most 20 s so that several land in
  // the same block and collide on the written-then-read key.
  const DurationMs span = std::min<DurationMs>(scenario.duration, 20 * kSecond);
  const MspId& attacker = attacker_msp(net);
  for (std::size_t i = 0; i < kExploitBurst; ++i) {
    PendingTx tx;
    tx.arrival = std::min(last, deployed + kSecond +
                                    span * static_cast<DurationMs>(i) /
                                        static_cast<DurationMs>(kExploitBurst));
    tx.creator = attacker;
    tx.chaincode = kVulnerableChaincode;
    tx.reads = {"vulncc_balance_attacker", "vulncc_pending_attacker"};
    tx.writes = {"vulncc_pending_attacker", "vulncc_balance_attacker"};
    tx.size_bytes = 2048 + 13 * i;
    workload.arrivals.push_back(std::move(tx));
  }
  return workload;
}

std::size_t EventTrace::transaction_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.transactions.size();
  return n;
}

EventTrace simulate(const NetworkDescriptor& net, const std::vector<ScenarioSpec>& scenarios,
                    DurationMs length, double baseline_tps) {
  validate_inputs(net, scenarios, length, baseline_tps);

  const TimestampMs start = kTraceEpoch;
  const TimestampMs end = start + length;

  Workload workload;
  workload.start = start;
  workload.length = length;
  workload.chaincodes = {{start, asset_chaincode()}, {start, payment_chaincode()}};

  auto arrival_rng = make_rng(net.seed, kArrivalStream);
  const double per_msp = baseline_tps / static_cast<double>(net.msps.size());
  for (const auto& msp : net.msps) {
    poisson_arrivals(arrival_rng, per_msp, start, end, [&](TimestampMs t) {
      workload.arrivals.push_back(baseline_tx(arrival_rng, msp, t));
    });
  }

  const MspId& attacker = attacker_msp(net);
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const auto& s = scenarios[si];
    auto rng = make_rng(net.seed, kScenarioStreamBase + si);
    const TimestampMs from = start + s.start_offset;
    const TimestampMs to = from + s.duration;
    switch (s.kind) {
      case ScenarioKind::Baseline:
      case ScenarioKind::N2LinkDos:
        break;
      case ScenarioKind::Sc2VulnChaincode:
        workload = inject_sc2(std::move(workload), s, net);
        break;
      case ScenarioKind::N2TxFlood: {
        std::uint64_t n = 0;
        poisson_arrivals(rng, (s.magnitude - 1.0) * baseline_tps, from, to, [&](TimestampMs t) {
          PendingTx tx;
          tx.arrival = t;
          tx.creator = attacker;
          tx.chaincode = "assetcc";
          const auto key = "flood_" + std::to_string(si) + "_" + std::to_string(n++);
          tx.writes = {key};
          tx.size_bytes = draw_size(rng);
          workload.arrivals.push_back(std::move(tx));
        });
        break;
      }
      case ScenarioKind::N2TxSize:
        for (auto& tx : workload.arrivals) {
          if (tx.creator == attacker && tx.arrival >= from && tx.arrival < to &&
              tx.type == TxType::Endorser) {
            tx.size_bytes = static_cast<std::uint64_t>(
                std::llround(static_cast<double>(tx.size_bytes) * s.magnitude));
          }
        }
        break;
      case ScenarioKind::Ac1ConfigChange: {
        PendingTx tx;
        tx.arrival = std::min(from, end - 1);
        tx.creator = attacker;
        tx.type = TxType::Config;
        const auto prefix = "channel/Application/" + attacker;
        tx.reads = {prefix + "/policies/Admins"};
        tx.writes = {prefix + "/policies/Admins", prefix + "/MSP"};
        tx.size_bytes = 14'336;
        workload.arrivals.push_back(std::move(tx));
        break;
      }
    }
  }

  std::stable_sort(workload.arrivals.begin(), workload.arrivals.end(),
                   [](const PendingTx& a, const PendingTx& b) { return a.arrival < b.arrival; });
  std::stable_sort(workload.chaincodes.begin(), workload.chaincodes.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  EventTrace trace;
  trace.network = net;
  trace.start = start;
  trace.length = length;
  trace.baseline_tps = baseline_tps;
  trace.scenarios = scenarios;
  trace.blocks = commit_blocks(workload.arrivals, cut_blocks(workload.arrivals, end), net.seed);
  trace.metrics = generate_metrics(net, scenarios, workload.arrivals, start, length);
  trace.logs = generate_logs(net, trace.blocks, workload.chaincodes, start, length);
  trace.chaincodes = std::move(workload.chaincodes);
  trace.issues = issue_fixture(start);
  return trace;
}

namespace {

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& item : items) out << to_line(item) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

void write_trace(const EventTrace& trace, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  write_lines(dir / kBlocksFile, trace.blocks);
  write_lines(dir / kMetricsFile, trace.metrics);
  write_lines(dir / kLogsFile, trace.logs);
  write_lines(dir / kChaincodesFile, trace.chaincodes);
  write_lines(dir / kIssuesFile, trace.issues);
  write_json(dir / kNetworkFile, trace.network);

  json scenarios = json::array();
  for (const auto& s : trace.scenarios) {
    scenarios.push_back({{"kind", std::string(to_string(s.kind))},
                         {"start_offset", s.start_offset},
                         {"duration", s.duration},
                         {"magnitude", s.magnitude},
                         {"window_from", trace.start + s.start_offset},
                         {"window_to", trace.start + s.start_offset + s.duration}});
  }
  write_json(dir / kScenariosFile, json{{"start", trace.start},
                                        {"length", trace.length},
                                        {"baseline_tps", trace.baseline_tps},
                                        {"scenarios", std::move(scenarios)}});
}

}  // namespace ledgerwatch::sim
