#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirage/trace.hpp"

namespace mirage {

struct DiversityReport {
  std::string name;
  std::size_t switch_count = 0;
  std::size_t components = 0;
  std::size_t pair_count = 0;
  std::size_t pairs_with_alternates = 0;
  double percentage = 0;
  // Capped simple-path counts between switch pairs (switch order), filled
  // only on request.
  std::vector<std::vector<int>> alt_path_matrix;
  bool matrix_truncated = false;
};

struct MatrixCaps {
  int max_paths = 64;
  int max_hops = 0;  // 0: no hop cap
};

/// Share of unordered switch pairs joined by two or more simple paths.
/// Hosts and the controller are ignored.
DiversityReport diversity_report(const Topology& topo, bool with_matrix = false, MatrixCaps caps = {});

/// Switch-only copy (hosts and controller stripped), switch ids preserved.
Topology switch_subgraph(const Topology& topo);

void write_matrix_csv(std::ostream& os, const DiversityReport& r, const Topology& topo);
/// Binary greyscale PPM; darker cells mean more alternate paths.
void write_matrix_ppm(std::ostream& os, const DiversityReport& r, int cell_px = 4);

struct DatasetSummary {
  std::size_t topologies = 0;
  std::size_t zero_redundancy = 0;
  std::vector<std::string> zero_names;
  // Ten 10-point bins over [0,100); bin 10 holds exactly 100%.
  std::vector<std::size_t> histogram = std::vector<std::size_t>(11, 0);
};

DatasetSummary dataset_classification(const std::vector<DiversityReport>& reports);

struct DetectionMetrics {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0, fpr = 0, fnr = 0;
  bool fpr_undefined = false;
  bool fnr_undefined = false;
  std::optional<double> mean_rt_unresponsive_ms;
  std::optional<double> mean_rt_responsive_ms;

  int population() const { return tp + fp + fn + tn; }
};

DetectionMetrics metrics_from_counts(int tp, int fp, int fn, int tn);

/// One probing pass. `truth[s]` is true when switch s is really unreachable;
/// every alert must name a labelled switch.
DetectionMetrics detection_metrics(const std::map<NodeId, bool>& truth, const std::vector<Alert>& alerts);

/// Every completed probe round in a trace, with response times.
DetectionMetrics detection_metrics(const Trace& tr);

/// Non-empty when the counts are the published 7/2/1/40 matrix: states the
/// computed values next to the printed 88% / 4% / 12%.
std::string published_matrix_note(const DetectionMetrics& m);

/// Human-readable block: counts, computed ratios, undefined-ratio flags and
/// the cross-check note when it applies.
std::string detection_report(const DetectionMetrics& m);

struct OverheadSummary {
  std::uint64_t controller_messages = 0;
  std::uint64_t packet_ins = 0;
  std::uint64_t path_requests = 0;
  std::uint64_t unique_requests = 0;
  std::uint64_t common_requests = 0;
  std::uint64_t flow_mods = 0;
  std::uint64_t rule_entries_installed = 0;
  std::size_t peak_rule_entries = 0;
  std::vector<RuleCountPoint> rule_count_series;
  std::vector<ProcessingDelay> processing_delays;
  double mean_processing_delay_ms = 0;
  double max_processing_delay_ms = 0;
  std::uint64_t per_packet_phase_packets = 0;
  std::uint64_t per_packet_phase_requests = 0;
  double per_packet_ratio = 0;  // requests per packet while per-packet rules apply
  double mean_requests_per_flow = 0;
  std::size_t data_flows = 0;
  double probe_loss = 0;  // 1 - replies/probes
};

OverheadSummary overhead_metrics(const Trace& tr);

}  // namespace mirage
