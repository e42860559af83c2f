// SPDX-License-Identifier: Apache-2.0
#include "support/support.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ledgerwatch/util.hpp"

namespace lwtest {

namespace fs = std::filesystem;
using namespace ledgerwatch;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto name = "lwtest-" + std::to_string(rd()) + "-" + std::to_string(counter++);
    auto candidate = fs::temp_directory_path() / name;
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void append_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("cannot append " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string directory_digest(const fs::path& dir) {
  std::map<std::string, std::uint64_t> hashes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    hashes[entry.path().filename().string()] = fnv1a64(read_file(entry.path()));
  }
  std::string digest;
  for (const auto& [name, h] : hashes) digest += name + ":" + to_hex(h) + "\n";
  return digest;
}

std::vector<Block> make_chain(std::uint64_t first, std::size_t count, std::size_t txs_per_block,
                              const std::string& prev_hash) {
  std::vector<Block> blocks;
  TimestampMs t = sim::kTraceEpoch + static_cast<TimestampMs>(first) * 10 * kSecond;
  for (std::size_t i = 0; i < count; ++i) {
    Block b;
    b.number = first + i;
    for (std::size_t k = 0; k < txs_per_block; ++k) {
      Transaction tx;
      tx.tx_id = "tx-" + std::to_string(b.number) + "-" + std::to_string(k);
      tx.block_num = b.number;
      tx.tx_index = static_cast<std::uint32_t>(k);
      tx.timestamp = t;
      tx.creator_msp = k % 2 == 0 ? "Org1MSP" : "Org2MSP";
      tx.chaincode = "basic";
      tx.size_bytes = 1000 + 10 * k;
      tx.write_set.push_back({"key" + std::to_string(k), "h", false});
      b.transactions.push_back(tx);
      t += kSecond;
    }
    b.tx_count = static_cast<std::uint32_t>(b.transactions.size());
    b.timestamp = b.transactions.empty() ? t : b.transactions.back().timestamp;
    t += kSecond;
    blocks.push_back(std::move(b));
  }
  rehash(blocks, prev_hash);
  return blocks;
}

void rehash(std::vector<Block>& blocks, const std::string& genesis_prev) {
  std::string prev = genesis_prev;
  for (auto& b : blocks) {
    b.prev_hash = prev;
    std::string digest = prev + "|" + std::to_string(b.number);
    for (const auto& tx : b.transactions) digest += "|" + tx.tx_id;
    b.data_hash = to_hex(fnv1a64(digest));
    prev = b.data_hash;
  }
}

MetricSample gossip(TimestampMs t, const std::string& source, const std::string& target,
                    double value) {
  return {t, MetricSeries::GossipSent, {{"source", source}, {"target", target}}, value};
}

sim::EventTrace write_scenario_trace(const fs::path& dir, const std::vector<std::string>& scenarios,
                                     DurationMs length, double tps, std::uint64_t seed,
                                     std::uint32_t msps, std::uint32_t peers) {
  std::vector<sim::ScenarioSpec> specs;
  for (const auto& s : scenarios) specs.push_back(sim::parse_scenario(s, length));
  const auto net = sim::make_network(msps, peers, seed);
  auto trace = sim::simulate(net, specs, length, tps);
  sim::write_trace(trace, dir);
  return trace;
}

}  // namespace lwtest
