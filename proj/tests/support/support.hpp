// SPDX-License-Identifier: Apache-2.0
// Helpers shared by the unit tests and the acceptance suite.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ledgerwatch/model.hpp"
#include "ledgerwatch/simulator.hpp"

namespace lwtest {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
void append_file(const std::filesystem::path& path, const std::string& content);
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// FNV-1a over the bytes of every regular file in the directory, keyed by file name.
std::string directory_digest(const std::filesystem::path& dir);

/// A hash-chained run of `count` blocks starting at `first`, each holding `txs_per_block`
/// endorser transactions one second apart.
std::vector<ledgerwatch::Block> make_chain(std::uint64_t first, std::size_t count,
                                           std::size_t txs_per_block = 2,
                                           const std::string& prev_hash = "0000000000000000");

/// Recomputes data_hash and the next block's prev_hash after a test edits a block.
void rehash(std::vector<ledgerwatch::Block>& blocks, const std::string& genesis_prev = "0000000000000000");

ledgerwatch::MetricSample gossip(ledgerwatch::TimestampMs t, const std::string& source,
                                 const std::string& target, double value);

/// Simulates and writes a trace; returns the in-memory copy as well.
ledgerwatch::sim::EventTrace write_scenario_trace(const std::filesystem::path& dir,
                                                  const std::vector<std::string>& scenarios,
                                                  ledgerwatch::DurationMs length, double tps = 2.0,
                                                  std::uint64_t seed = 42, std::uint32_t msps = 2,
                                                  std::uint32_t peers = 2);

}  // namespace lwtest
