// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ledgerwatch/api.hpp"
#include "ledgerwatch/detect.hpp"
#include "ledgerwatch/monitor.hpp"
#include "ledgerwatch/serialization.hpp"
#include "ledgerwatch/simulator.hpp"
#include "ledgerwatch/util.hpp"

namespace ledgerwatch::cli {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string scenario_help() {
  std::string text = "Comma-separated kind[@start[+duration]][*magnitude]. Kinds (defaults for a 2h trace):";
  for (auto kind : sim::all_scenario_kinds()) {
    const auto spec = sim::default_scenario(kind, 2 * kHour);
    text += "\n  " + std::string(sim::to_string(kind));
    if (kind == sim::ScenarioKind::Baseline) continue;
    text += " @" + format_duration(spec.start_offset) + "+" + format_duration(spec.duration);
    if (kind == sim::ScenarioKind::N2TxFlood || kind == sim::ScenarioKind::N2TxSize ||
        kind == sim::ScenarioKind::N2LinkDos) {
      std::ostringstream m;
      m << spec.magnitude;
      text += " *" + m.str();
    }
  }
  return text;
}

std::string window_text(const sim::ScenarioSpec& spec) {
  return format_duration(spec.start_offset) + ".." + format_duration(spec.start_offset + spec.duration);
}

struct SimulateArgs {
  std::string scenarios = "baseline";
  std::uint64_t seed = 42;
  std::string duration = "2h";
  double tps = 2.0;
  std::uint32_t msps = 2;
  std::uint32_t peers = 2;
  std::string out;
};

int simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  const auto length = parse_duration(args.duration);
  if (!length || *length <= 0) {
    err << "error: --duration must be a positive duration such as 30m or 2h\n";
    return kBadArguments;
  }
  sim::EventTrace trace;
  try {
    std::vector<sim::ScenarioSpec> specs;
    std::stringstream list(args.scenarios);
    std::string item;
    while (std::getline(list, item, ',')) {
      if (!item.empty()) specs.push_back(sim::parse_scenario(item, *length));
    }
    const auto net = sim::make_network(args.msps, args.peers, args.seed);
    trace = sim::simulate(net, specs, *length, args.tps);
  } catch (const sim::SimulationError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  }
  try {
    sim::write_trace(trace, args.out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }

  out << "trace written to " << args.out << "\n"
      << "  seed " << args.seed << ", length " << format_duration(trace.length) << ", "
      << args.tps << " tps, " << trace.network.msps.size() << " MSPs x "
      << trace.network.peers_per_msp << " peers\n"
      << "  blocks " << trace.blocks.size() << ", transactions " << trace.transaction_count()
      << ", metric samples " << trace.metrics.size() << ", log lines " << trace.logs.size()
      << ", chaincodes " << trace.chaincodes.size() << ", issues " << trace.issues.size() << "\n";
  for (const auto& spec : trace.scenarios) {
    out << "  scenario " << sim::to_string(spec.kind);
    if (spec.kind != sim::ScenarioKind::Baseline) {
      out << " window " << window_text(spec) << " magnitude " << spec.magnitude;
    }
    out << "\n";
  }
  return kOk;
}

std::optional<RuleConfig> rules_from(const std::string& path, std::ostream& err) {
  if (path.empty()) return RuleConfig{};
  try {
    return load_rule_config(path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

int scan(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot read " << path << "\n";
    return kIoFailure;
  }
  std::vector<ChaincodeDeployment> inputs;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      inputs.push_back({j.value("timestamp", TimestampMs{0}), j.get<ChaincodeIR>()});
    } catch (const std::exception& e) {
      err << "error: " << path << ":" << number << ": " << e.what() << "\n";
      return kBadArguments;
    }
  }
  bool high = false;
  for (const auto& input : inputs) {
    const auto report = scan_chaincode(input.chaincode, input.timestamp);
    for (const auto& f : report.findings) high |= f.severity == FindingSeverity::High;
    out << to_line(report) << "\n";
  }
  return high ? kHighFinding : kOk;
}

int replay_command(const std::string& data, const std::string& rules_path, std::ostream& out,
                   std::ostream& err) {
  const auto rules = rules_from(rules_path, err);
  if (!rules) return kBadArguments;
  try {
    const json alerts = replay(data, *rules);
    out << alerts.dump(2) << "\n";
  } catch (const IngestError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }
  return kOk;
}

struct ServeArgs {
  std::string config_file;
  std::string data;
  std::string listen;
  std::string rules;
  std::string store;
  std::string cadence;
  std::string poll;
  std::string static_dir;
  std::vector<std::string> cors;
};

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  ApiConfig config;
  try {
    if (!args.config_file.empty()) config = load_api_config(args.config_file);
    apply_env_overrides(config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  }
  if (!args.data.empty()) config.data_dir = args.data;
  if (!args.listen.empty()) config.listen_address = args.listen;
  if (!args.rules.empty()) config.rules_file = args.rules;
  if (!args.store.empty()) config.store_dir = args.store;
  if (!args.static_dir.empty()) config.static_dir = args.static_dir;
  if (!args.cors.empty()) config.cors_origins = args.cors;
  for (const auto& [text, field] : {std::pair{&args.cadence, &config.evaluation_cadence},
                                    std::pair{&args.poll, &config.poll_interval}}) {
    if (text->empty()) continue;
    const auto d = parse_duration(*text);
    if (!d) {
      err << "error: invalid duration '" << *text << "'\n";
      return kBadArguments;
    }
    *field = *d;
  }
  if (auto problem = check_api_config(config); !problem.empty()) {
    err << "error: " << problem << "\n";
    return kIoFailure;
  }
  const auto rules = rules_from(config.rules_file ? config.rules_file->string() : "", err);
  if (!rules) return kBadArguments;

  try {
    MonitorOptions options;
    options.sources = trace_sources(config.data_dir, config.poll_interval);
    options.rules = *rules;
    options.evaluation_cadence = config.evaluation_cadence;
    options.network = load_network(config.data_dir);

    Store store(config.store_dir.value_or(config.data_dir / "store"));
    for (const auto& warning : store.load_warnings()) err << "warning: " << warning << "\n";
    Monitor monitor(store, options);
    ApiServer api(monitor, config);
    if (!api.bind()) {
      err << "error: cannot listen on " << config.listen_address << "\n";
      return kIoFailure;
    }
    api.start();
    out << "listening on " << config.listen_address << " (port " << api.port() << ")" << std::endl;

    monitor.poll_once();
    monitor.evaluate(wall_clock_ms());
    monitor.start();

    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    out << "shutting down" << std::endl;
    monitor.stop();
    api.stop();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Security monitoring for permissioned blockchain networks"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a deterministic network trace");
  simulate_cmd->add_option("--scenario", sim_args.scenarios, scenario_help())->capture_default_str();
  simulate_cmd->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  simulate_cmd->add_option("--duration", sim_args.duration, "Trace length, e.g. 30m or 2h")
      ->capture_default_str();
  simulate_cmd->add_option("--tps", sim_args.tps, "Baseline transactions per second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--msps", sim_args.msps, "Number of organizations")
      ->capture_default_str()
      ->check(CLI::Range(2u, 64u));
  simulate_cmd->add_option("--peers", sim_args.peers, "Peers per organization")
      ->capture_default_str()
      ->check(CLI::Range(1u, 64u));
  simulate_cmd->add_option("--out", sim_args.out, "Output directory")->required();

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Ingest a trace directory and serve the API");
  serve_cmd->add_option("--config", serve_args.config_file, "JSON configuration file");
  serve_cmd->add_option("--data", serve_args.data, "Trace directory to follow");
  serve_cmd->add_option("--listen", serve_args.listen, "host:port (default 127.0.0.1:8080)");
  serve_cmd->add_option("--rules", serve_args.rules, "Rule threshold file");
  serve_cmd->add_option("--store", serve_args.store, "Store directory (default <data>/store)");
  serve_cmd->add_option("--cadence", serve_args.cadence, "Evaluation cadence (default 60s)");
  serve_cmd->add_option("--poll", serve_args.poll, "Source poll interval (default 1s)");
  serve_cmd->add_option("--static", serve_args.static_dir, "Directory with the built UI");
  serve_cmd->add_option("--cors", serve_args.cors, "Allowed CORS origin (repeatable)");

  std::string chaincode_file;
  auto* scan_cmd = app.add_subcommand("scan", "Scan chaincode IR files; exit 3 on HIGH findings");
  scan_cmd->add_option("--chaincode", chaincode_file, "JSONL file with one chaincode per line")
      ->required();

  std::string replay_data;
  std::string replay_rules;
  auto* replay_cmd = app.add_subcommand("replay", "Run detection offline over a complete trace");
  replay_cmd->add_option("--data", replay_data, "Trace directory")->required();
  replay_cmd->add_option("--rules", replay_rules, "Rule threshold file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadArguments;
  }

  if (*simulate_cmd) return simulate(sim_args, out, err);
  if (*serve_cmd) return serve(serve_args, out, err);
  if (*scan_cmd) return scan(chaincode_file, out, err);
  if (*replay_cmd) return replay_command(replay_data, replay_rules, out, err);
  return kBadArguments;
}

}  // namespace ledgerwatch::cli
