#include "mirage/attacker.hpp"

#include <algorithm>
#include <cmath>

namespace mirage {

void ReconConfig::validate() const {
  if (attacker == kNoNode) throw ConfigError("attacker.recon.host", "missing");
  if (peer == kNoNode) throw ConfigError("attacker.recon.peer", "missing");
  if (trials < 1) throw ConfigError("attacker.recon.trials", "must be >= 1");
  if (!(burst_rate_pkt_per_ms > 0)) throw ConfigError("attacker.recon.burst_rate_pkt_per_ms", "must be > 0");
  if (burst_duration_us <= 0) throw ConfigError("attacker.recon.burst_duration_ms", "must be > 0");
  if (burst_offset_us < 0) throw ConfigError("attacker.recon.burst_offset_ms", "must be >= 0");
  if (warmup_lead_us < 0) throw ConfigError("attacker.recon.warmup_lead_ms", "must be >= 0");
  if (slot_us <= 0) throw ConfigError("attacker.recon.slot_ms", "must be > 0");
  if (!(threshold_ms >= 0)) throw ConfigError("attacker.recon.threshold_ms", "must be >= 0");
}

ReconPlan schedule_recon(Simulator& sim, const ReconConfig& cfg) {
  cfg.validate();
  const Topology& t = sim.topology();
  auto is_host = [&](NodeId n) { return n < t.node_count() && t.node(n).kind == NodeKind::Host; };
  if (!is_host(cfg.attacker)) throw ValidationError("recon attacker must be a host");
  if (!is_host(cfg.peer)) throw ValidationError("recon peer must be a host");

  ReconPlan plan;
  plan.cfg = cfg;
  std::vector<NodeId> usable;
  for (NodeId c : cfg.candidates) {
    if (!is_host(c))
      plan.skipped.push_back({c, "not a host"});
    else if (c == cfg.attacker || c == cfg.peer)
      plan.skipped.push_back({c, "candidate is the attacker or its peer"});
    else
      usable.push_back(c);
  }

  const auto burst_packets = static_cast<std::uint32_t>(
      std::max(1.0, std::floor(cfg.burst_rate_pkt_per_ms * us_to_ms(cfg.burst_duration_us))));
  SimTime slot = cfg.start_us;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (NodeId c : usable) {
      for (bool with_burst : {false, true}) {
        ReconSlot s;
        s.candidate = c;
        s.trial = trial;
        s.with_burst = with_burst;
        s.at = slot;
        const SimTime burst_start = slot + cfg.warmup_lead_us;
        if (with_burst) {
          FlowSpec b;
          b.kind = FlowKind::Cbr;
          b.src = cfg.attacker;
          b.dst = c;
          b.start = slot;
          b.packets = burst_packets + 1;
          b.rate_pkt_per_ms = cfg.burst_rate_pkt_per_ms;
          b.first_gap_us = cfg.warmup_lead_us;
          b.tag = "recon-burst";
          s.burst = sim.add_flow(b);
          sim.add_marker(burst_start, EventKind::BurstStart, s.burst);
          sim.add_marker(burst_start + cfg.burst_duration_us, EventKind::BurstEnd, s.burst);
        }
        FlowSpec p;
        p.kind = FlowKind::Ping;
        p.src = cfg.attacker;
        p.dst = cfg.peer;
        p.start = burst_start + cfg.burst_offset_us;
        p.packets = 2;
        p.tag = with_burst ? "recon-probe-burst" : "recon-probe-baseline";
        s.probe = sim.add_flow(p);
        plan.slots.push_back(s);
        slot += cfg.slot_us;
      }
    }
  }
  plan.end = slot;
  return plan;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

const CandidateVerdict* ReconResult::find(NodeId c) const {
  for (const auto& v : candidates)
    if (v.candidate == c) return &v;
  return nullptr;
}

ReconResult analyze_recon(const Trace& tr, const ReconPlan& plan) {
  ReconResult r;
  r.threshold_ms = plan.cfg.threshold_ms;
  std::vector<NodeId> order;
  for (const auto& s : plan.slots)
    if (std::find(order.begin(), order.end(), s.candidate) == order.end()) order.push_back(s.candidate);

  for (NodeId c : order) {
    CandidateVerdict v;
    v.candidate = c;
    for (const auto& s : plan.slots) {
      if (s.candidate != c) continue;
      auto samples = tr.rtts_of(s.probe);
      if (samples.size() < 2 || samples[0].timed_out || samples[1].timed_out) continue;
      const double delta = samples[0].rtt_ms() - samples[1].rtt_ms();
      (s.with_burst ? v.burst_deltas_ms : v.baseline_deltas_ms).push_back(delta);
    }
    if (v.baseline_deltas_ms.empty() || v.burst_deltas_ms.empty()) {
      v.skipped = true;
      v.skip_reason = "no complete probe pairs";
    } else {
      v.baseline_delta_ms = median(v.baseline_deltas_ms);
      v.burst_delta_ms = median(v.burst_deltas_ms);
      v.classified_shared = v.burst_delta_ms - v.baseline_delta_ms > r.threshold_ms;
      if (v.classified_shared) r.inferred_shared.push_back(c);
    }
    r.candidates.push_back(std::move(v));
  }
  for (const auto& [c, why] : plan.skipped) {
    CandidateVerdict v;
    v.candidate = c;
    v.skipped = true;
    v.skip_reason = why;
    r.candidates.push_back(std::move(v));
  }
  return r;
}

std::set<DirectedLink> shared_links_ground_truth(const Topology& topo, DefaultRoutes& routes,
                                                 NodeId attacker, NodeId candidate) {
  const auto ctrl = topo.controller();
  if (!ctrl) throw ValidationError("ground truth needs a controller");
  const NodeId s = topo.attachment_switch(attacker);
  auto directed = [](const std::vector<NodeId>& nodes) {
    std::set<DirectedLink> out;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) out.insert({nodes[i], nodes[i + 1]});
    return out;
  };
  const auto data = directed(routes.route(attacker, candidate).nodes);
  const auto control = directed(routes.route(s, *ctrl).nodes);
  std::set<DirectedLink> both;
  std::set_intersection(data.begin(), data.end(), control.begin(), control.end(),
                        std::inserter(both, both.end()));
  return both;
}

double ReconScore::precision() const { return tp + fp == 0 ? (fn == 0 ? 1.0 : 0.0) : double(tp) / (tp + fp); }
double ReconScore::recall() const { return tp + fn == 0 ? 1.0 : double(tp) / (tp + fn); }
double ReconScore::accuracy() const { return evaluated() == 0 ? 0.0 : double(tp + tn) / evaluated(); }

ReconScore score_recon(const ReconResult& r, const Topology& topo, DefaultRoutes& routes,
                       NodeId attacker) {
  ReconScore s;
  for (const auto& v : r.candidates) {
    if (v.skipped) continue;
    const bool truth = !shared_links_ground_truth(topo, routes, attacker, v.candidate).empty();
    if (v.classified_shared && truth) ++s.tp;
    else if (v.classified_shared) ++s.fp;
    else if (truth) ++s.fn;
    else ++s.tn;
  }
  return s;
}

FloodReport schedule_flood(Simulator& sim, const AttackPlan& plan) {
  const Topology& t = sim.topology();
  FloodReport rep;
  if (plan.rate_pkt_per_ms < 0) throw ConfigError("attacker.flood.rate_pkt_per_ms", "must be >= 0");
  double access = 0;
  for (NodeId d : plan.decoys) {
    if (d >= t.node_count() || t.node(d).kind != NodeKind::Host)
      throw ConfigError("attacker.flood.decoys", "decoys must be hosts");
    access += t.link(t.neighbors(d).at(0).link).capacity;
  }
  if (plan.rate_pkt_per_ms > access)
    throw ConfigError("attacker.flood.rate_pkt_per_ms", "exceeds total decoy access capacity");
  if (plan.rate_pkt_per_ms == 0 || plan.duration_us <= 0) return rep;

  DefaultRoutes& routes = sim.routes();
  const auto packets = static_cast<std::uint32_t>(
      std::max(1.0, std::floor(plan.rate_pkt_per_ms * us_to_ms(plan.duration_us))));
  for (const auto& target : plan.target_links) {
    if (!t.find_link(target.first, target.second)) {
      rep.uncoverable.push_back(target);
      continue;
    }
    bool found = false;
    for (NodeId a : plan.decoys) {
      for (NodeId b : plan.decoys) {
        if (a == b) continue;
        const auto& nodes = routes.route(a, b).nodes;
        for (std::size_t i = 0; i + 1 < nodes.size() && !found; ++i)
          found = (nodes[i] == target.first && nodes[i + 1] == target.second) ||
                  (nodes[i] == target.second && nodes[i + 1] == target.first);
        if (!found) continue;
        FlowSpec f;
        f.kind = FlowKind::Cbr;
        f.src = a;
        f.dst = b;
        f.start = plan.start_us;
        f.packets = packets;
        f.rate_pkt_per_ms = plan.rate_pkt_per_ms;
        f.tag = "flood";
        f.decoy = true;
        rep.covered.push_back({target, a, b, sim.add_flow(f)});
        break;
      }
      if (found) break;
    }
    if (!found) rep.uncoverable.push_back(target);
  }
  return rep;
}

}  // namespace mirage
