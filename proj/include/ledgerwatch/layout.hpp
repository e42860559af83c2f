// SPDX-License-Identifier: Apache-2.0
//
// File names of a trace / store directory. A trace written by the simulator is a
// valid store directory; the store adds scans, alerts and ingestion cursors.
#pragma once

namespace ledgerwatch {

inline constexpr const char* kBlocksFile = "blocks.jsonl";
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kLogsFile = "logs.jsonl";
inline constexpr const char* kChaincodesFile = "chaincodes.jsonl";
inline constexpr const char* kIssuesFile = "issues.jsonl";
inline constexpr const char* kScansFile = "scans.jsonl";
inline constexpr const char* kAlertsFile = "alerts.jsonl";
inline constexpr const char* kCursorsFile = "cursors.json";
inline constexpr const char* kNetworkFile = "network.json";
inline constexpr const char* kScenariosFile = "scenarios.json";

}  // namespace ledgerwatch
