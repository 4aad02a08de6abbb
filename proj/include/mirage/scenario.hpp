#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/analysis.hpp"
#include "mirage/attacker.hpp"

namespace mirage {

struct TopologySpec {
  std::string builtin;   // dumbbell | ring | star | path | complete | random
  int size = 4;
  int extra_edges = 0;   // random only
  std::string gml_path;  // resolved against the scenario file's directory
};

struct PinnedHost {
  std::string label;
  std::string sw;
};

struct FlowConfig {
  FlowKind kind = FlowKind::Ping;
  std::string src, dst;
  double start_ms = 0;
  std::uint32_t packets = 1;
  double rate_pkt_per_ms = 1;
  double gap_ms = 0;
  std::string tag;
};

struct BackgroundConfig {
  double load = 0;  // fraction of the default link capacity, per flow
  int flows = 0;    // random host pairs, used when `pairs` is empty
  std::vector<std::pair<std::string, std::string>> pairs;
  double start_ms = 0;
  double duration_ms = 0;  // 0: until the horizon
};

struct ReconSpec {
  bool enabled = false;
  std::string host, peer;
  std::vector<std::string> candidates;  // empty: every other host
  ReconConfig params;                   // host ids filled at build time
};

struct FloodSpec {
  bool enabled = false;
  std::vector<std::pair<std::string, std::string>> targets;
  std::vector<std::string> decoys;
  double rate_pkt_per_ms = 0;
  double start_ms = 0;
  double duration_ms = 0;
};

struct Scenario {
  std::string name;
  std::string base_dir;
  std::uint64_t seed = 0;
  double horizon_ms = 0;
  TopologySpec topology;
  LinkDefaults links;
  std::string controller_placement = "max_degree";  // max_degree | centroid | node
  std::string controller_node;
  int random_hosts = 0;
  std::vector<PinnedHost> pinned;
  std::vector<FlowConfig> flows;
  BackgroundConfig background;
  ReconSpec recon;
  FloodSpec flood;
  SimConfig sim;
  std::vector<std::string> unresponsive;
  std::string output_dir = "out";
  bool write_trace = true;
  nlohmann::json raw;  // as loaded, with overrides applied
  std::string config_hash;
};

/// Parses and validates; errors are ConfigError naming the offending key.
Scenario parse_scenario(const nlohmann::json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Sweepable parameters: load, lambda, probeInterval, burst_rate.
bool is_sweep_param(const std::string& p);
nlohmann::json with_param(nlohmann::json j, const std::string& param, double value);
nlohmann::json with_seed(nlohmann::json j, std::uint64_t seed);

std::string sha256_hex(const std::string& data);

/// Base graph, controller, pinned then random hosts.
Topology build_topology(const Scenario& sc);

struct RunOutput {
  Topology topo;
  Trace trace;
  std::optional<ReconPlan> plan;
  std::optional<ReconResult> recon;
  std::optional<ReconScore> score;
  std::optional<FloodReport> flood;
  DetectionMetrics detection;
  OverheadSummary overhead;
  std::string verdict;
};

RunOutput run_scenario(const Scenario& sc);

/// trace.jsonl, rtt.csv, utilization.csv, recon.json, alerts.json,
/// overhead.json, summary.json; each carries the seed and config hash.
void write_outputs(const Scenario& sc, const RunOutput& out, const std::string& dir);

nlohmann::json summary_json(const Scenario& sc, const RunOutput& out);

}  // namespace mirage
