#include "mirage/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace mirage {

Topology switch_subgraph(const Topology& topo) {
  Topology out(topo.name(), topo.source_format());
  std::vector<NodeId> map(topo.node_count(), kNoNode);
  for (NodeId n = 0; n < topo.node_count(); ++n)
    if (topo.is_switch(n)) map[n] = out.add_node(topo.node(n));
  for (const Link& l : topo.links())
    if (map[l.a] != kNoNode && map[l.b] != kNoNode)
      out.add_link(map[l.a], map[l.b], l.capacity, l.latency_ms, l.queue_limit);
  return out;
}

DiversityReport diversity_report(const Topology& input, bool with_matrix, MatrixCaps caps) {
  const Topology topo = switch_subgraph(input);
  DiversityReport r;
  r.name = topo.name();
  const std::size_t n = topo.node_count();
  r.switch_count = n;
  r.components = topo.switch_components().size();
  r.pair_count = n < 2 ? 0 : n * (n - 1) / 2;
  const BridgeIndex bi(topo);
  for (NodeId u = 0; u < n; ++u) {
    const auto alt = bi.alternates_from(u);
    for (NodeId v = u + 1; v < n; ++v)
      if (alt[v]) ++r.pairs_with_alternates;
  }
  r.percentage = r.pair_count == 0 ? 0.0 : 100.0 * r.pairs_with_alternates / r.pair_count;

  if (with_matrix) {
    r.alt_path_matrix.assign(n, std::vector<int>(n, 0));
    const int hops = caps.max_hops > 0 ? caps.max_hops : std::max<int>(1, static_cast<int>(n) - 1);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        auto e = enumerate_all_paths(topo, u, v, hops, caps.max_paths);
        r.matrix_truncated = r.matrix_truncated || e.truncated;
        r.alt_path_matrix[u][v] = r.alt_path_matrix[v][u] = static_cast<int>(e.paths.size());
      }
    }
  }
  return r;
}

void write_matrix_csv(std::ostream& os, const DiversityReport& r, const Topology& input) {
  const Topology topo = switch_subgraph(input);
  os << "node";
  for (NodeId i = 0; i < topo.node_count(); ++i) os << ',' << topo.node(i).label;
  os << '\n';
  for (std::size_t i = 0; i < r.alt_path_matrix.size(); ++i) {
    os << topo.node(static_cast<NodeId>(i)).label;
    for (int c : r.alt_path_matrix[i]) os << ',' << c;
    os << '\n';
  }
}

void write_matrix_ppm(std::ostream& os, const DiversityReport& r, int cell_px) {
  const std::size_t n = r.alt_path_matrix.size();
  int peak = 1;
  for (const auto& row : r.alt_path_matrix)
    for (int c : row) peak = std::max(peak, c);
  const std::size_t side = std::max<std::size_t>(1, n * cell_px);
  os << "P6\n" << side << ' ' << side << "\n255\n";
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      unsigned char g = 255;
      if (n > 0) {
        const int c = r.alt_path_matrix[y / cell_px][x / cell_px];
        g = static_cast<unsigned char>(255 - std::lround(255.0 * c / peak));
      }
      os.put(static_cast<char>(g)).put(static_cast<char>(g)).put(static_cast<char>(g));
    }
  }
}

DatasetSummary dataset_classification(const std::vector<DiversityReport>& reports) {
  if (reports.empty()) throw ValidationError("dataset classification needs at least one report");
  DatasetSummary s;
  s.topologies = reports.size();
  for (const auto& r : reports) {
    if (r.pairs_with_alternates == 0) {
      ++s.zero_redundancy;
      s.zero_names.push_back(r.name);
    }
    const std::size_t bin = r.percentage >= 100.0 ? 10 : static_cast<std::size_t>(r.percentage / 10.0);
    ++s.histogram[std::min<std::size_t>(bin, 10)];
  }
  return s;
}

DetectionMetrics metrics_from_counts(int tp, int fp, int fn, int tn) {
  if (tp < 0 || fp < 0 || fn < 0 || tn < 0) throw ValidationError("negative confusion count");
  DetectionMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const int pop = m.population();
  m.accuracy = pop == 0 ? 0.0 : static_cast<double>(tp + tn) / pop;
  m.fpr_undefined = fp + tn == 0;
  m.fpr = m.fpr_undefined ? 0.0 : static_cast<double>(fp) / (fp + tn);
  m.fnr_undefined = fn + tp == 0;
  m.fnr = m.fnr_undefined ? 0.0 : static_cast<double>(fn) / (fn + tp);
  return m;
}

DetectionMetrics detection_metrics(const std::map<NodeId, bool>& truth, const std::vector<Alert>& alerts) {
  std::map<NodeId, bool> alerted;
  for (const auto& [sw, _] : truth) alerted[sw] = false;
  for (const Alert& a : alerts) {
    auto it = alerted.find(a.sw);
    if (it == alerted.end())
      throw ValidationError("alert for switch " + std::to_string(a.sw) + " outside the labelled population");
    it->second = true;
  }
  int tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& [sw, down] : truth) {
    const bool a = alerted[sw];
    if (a && down) ++tp;
    else if (a) ++fp;
    else if (down) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

DetectionMetrics detection_metrics(const Trace& tr) {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double rt_down = 0, rt_up = 0;
  int n_down = 0, n_up = 0;
  for (const ProbeRecord& p : tr.probes) {
    if (p.alert && p.truly_unresponsive) ++tp;
    else if (p.alert) ++fp;
    else if (p.truly_unresponsive) ++fn;
    else ++tn;
    if (!p.first_response_at) continue;
    const double rt = us_to_ms(*p.first_response_at - p.started_at);
    if (p.truly_unresponsive) {
      rt_down += rt;
      ++n_down;
    } else {
      rt_up += rt;
      ++n_up;
    }
  }
  DetectionMetrics m = metrics_from_counts(tp, fp, fn, tn);
  if (n_down) m.mean_rt_unresponsive_ms = rt_down / n_down;
  if (n_up) m.mean_rt_responsive_ms = rt_up / n_up;
  return m;
}

std::string published_matrix_note(const DetectionMetrics& m) {
  if (!(m.tp == 7 && m.fp == 2 && m.fn == 1 && m.tn == 40)) return "";
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "published matrix tp=7 fp=2 fn=1 tn=40: computed accuracy %.2f%%, fpr %.2f%%, fnr %.2f%%; "
                "printed values 88%% / 4%% / 12%% do not follow from these counts",
                100.0 * m.accuracy, 100.0 * m.fpr, 100.0 * m.fnr);
  return buf;
}

std::string detection_report(const DetectionMetrics& m) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "confusion matrix: tp=%d fp=%d fn=%d tn=%d (population %d)\n", m.tp, m.fp, m.fn,
                m.tn, m.population());
  out += buf;
  std::snprintf(buf, sizeof buf, "accuracy %.2f%%  fpr %.2f%%%s  fnr %.2f%%%s\n", 100.0 * m.accuracy, 100.0 * m.fpr,
                m.fpr_undefined ? " (undefined: no negatives)" : "", 100.0 * m.fnr,
                m.fnr_undefined ? " (undefined: no positives)" : "");
  out += buf;
  if (m.mean_rt_unresponsive_ms || m.mean_rt_responsive_ms) {
    auto ms = [](const std::optional<double>& v) {
      if (!v) return std::string("n/a");
      char b[48];
      std::snprintf(b, sizeof b, "%.3f ms", *v);
      return std::string(b);
    };
    out += "mean response time: unresponsive " + ms(m.mean_rt_unresponsive_ms) + "  responsive " +
           ms(m.mean_rt_responsive_ms) + "\n";
  }
  const std::string note = published_matrix_note(m);
  if (!note.empty()) out += "note: " + note + "\n";
  return out;
}

OverheadSummary overhead_metrics(const Trace& tr) {
  OverheadSummary o;
  const auto& c = tr.controller;
  o.controller_messages = c.messages();
  o.packet_ins = c.packet_ins;
  o.path_requests = c.path_requests;
  o.unique_requests = c.unique_requests;
  o.common_requests = c.common_requests;
  o.flow_mods = c.flow_mods;
  o.rule_entries_installed = c.rule_entries;
  o.peak_rule_entries = tr.peak_rule_entries;
  o.rule_count_series = tr.rule_counts;
  o.processing_delays = tr.processing;
  if (!tr.processing.empty()) {
    double sum = 0, mx = 0;
    for (const auto& p : tr.processing) {
      sum += us_to_ms(p.waited_us);
      mx = std::max(mx, us_to_ms(p.waited_us));
    }
    o.mean_processing_delay_ms = sum / tr.processing.size();
    o.max_processing_delay_ms = mx;
  }
  std::uint64_t req = 0;
  for (const FlowStats& f : tr.flows) {
    if (f.kind == FlowKind::Arp) continue;
    ++o.data_flows;
    req += f.path_requests;
    o.per_packet_phase_packets += f.per_packet_phase;
    o.per_packet_phase_requests += f.unique_requests;
  }
  o.per_packet_ratio = o.per_packet_phase_packets == 0
                           ? 0.0
                           : static_cast<double>(o.per_packet_phase_requests) / o.per_packet_phase_packets;
  o.mean_requests_per_flow = o.data_flows == 0 ? 0.0 : static_cast<double>(req) / o.data_flows;
  o.probe_loss = c.probes_sent == 0 ? 0.0 : 1.0 - static_cast<double>(c.probe_replies) / c.probes_sent;
  return o;
}

}  // namespace mirage
