#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "mirage/attacker.hpp"
#include "mirage/routing.hpp"

namespace oracle {

using namespace mirage;

// Relaxes every directed edge |V|-1 times.
inline std::vector<double> bellman_ford(const Topology& t, NodeId src, const WeightFn& w,
                                        Combine combine = Combine::Sum) {
  auto fold = [&](double d, double c) { return combine == Combine::Sum ? d + c : std::max(d, c); };
  std::vector<double> d(t.node_count(), kUnreachable);
  d[src] = 0;
  for (std::size_t round = 1; round < t.node_count(); ++round) {
    bool changed = false;
    for (const Link& l : t.links()) {
      const double c = w(l);
      if (fold(d[l.a], c) < d[l.b]) d[l.b] = fold(d[l.a], c), changed = true;
      if (fold(d[l.b], c) < d[l.a]) d[l.a] = fold(d[l.b], c), changed = true;
    }
    if (!changed) break;
  }
  return d;
}

// Every simple path src->dst, found by recursion over an adjacency matrix.
inline std::set<std::vector<NodeId>> all_simple_paths(const Topology& t, NodeId src, NodeId dst) {
  const std::size_t n = t.node_count();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const Link& l : t.links()) adj[l.a][l.b] = adj[l.b][l.a] = true;
  std::set<std::vector<NodeId>> out;
  std::vector<NodeId> stack{src};
  std::vector<bool> used(n, false);
  used[src] = true;
  std::function<void(NodeId)> go = [&](NodeId u) {
    if (u == dst) {
      out.insert(stack);
      return;
    }
    for (NodeId v = 0; v < n; ++v) {
      if (!adj[u][v] || used[v]) continue;
      used[v] = true;
      stack.push_back(v);
      go(v);
      stack.pop_back();
      used[v] = false;
    }
  };
  go(src);
  return out;
}

// Random connected graph with independent structure from the library builder.
inline Topology random_graph(Rng& rng, int n, double p) {
  std::vector<std::pair<int, int>> e;
  for (int v = 1; v < n; ++v) e.emplace_back(static_cast<int>(rng.uniform(v)), v);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform(1000) < p * 1000) e.emplace_back(u, v);
  return build::from_edges(n, e);
}

// Topology, attacker, peer and candidates for a recon trial. Balanced
// cases carry k candidates whose route leaves the attacker's switch
// towards the controller and k that do not.
struct ReconCase {
  Topology topo;
  NodeId attacker = kNoNode;
  NodeId peer = kNoNode;
  std::vector<NodeId> candidates;
  bool diverse_control = false;  // attacker and controller switches share a 2-edge-connected component
};

inline std::optional<ReconCase> recon_case(int seed, bool balanced) {
  Topology base = build::random_connected(8 + seed % 12, 3 + seed % 6, seed);
  ReconCase rc;
  rc.topo = place_controller(base, MaxDegree{});
  Topology& t = rc.topo;
  const auto sw = t.switches();
  Rng rng(seed);
  const NodeId a_sw = sw[rng.uniform(sw.size())];
  const NodeId csw = t.attachment_switch(*t.controller());
  const BridgeIndex bi(t);
  rc.diverse_control = a_sw != csw && bi.component(a_sw) == bi.component(csw);
  if (balanced && !rc.diverse_control) return std::nullopt;
  rc.attacker = attach_host(t, a_sw, "attacker");
  rc.peer = attach_host(t, a_sw, "peer");
  if (!balanced) {
    for (NodeId s : sw)
      if (s != a_sw) rc.candidates.push_back(attach_host(t, s, "c" + std::to_string(s)));
    return rc;
  }
  DefaultRoutes r0(t);
  const auto c = r0.route(a_sw, *t.controller()).nodes;
  std::vector<NodeId> shared, free;
  for (NodeId s : sw) {
    const auto d = r0.route(a_sw, s).nodes;
    (d.size() > 1 && d[1] == c[1] ? shared : free).push_back(s);
  }
  const int k = std::min<int>({4, static_cast<int>(shared.size()), static_cast<int>(free.size())});
  if (k == 0) return std::nullopt;
  for (int i = 0; i < k; ++i)
    rc.candidates.push_back(attach_host(t, shared[rng.uniform(shared.size())], "x" + std::to_string(i)));
  for (int i = 0; i < k; ++i)
    rc.candidates.push_back(attach_host(t, free[rng.uniform(free.size())], "y" + std::to_string(i)));
  return rc;
}

struct ReconRun {
  ReconResult result;
  ReconScore score;
};

inline ReconRun run_recon(const ReconCase& rc, DefenseMode mode) {
  SimConfig cfg;
  cfg.record_events = false;
  cfg.defense.mode = mode;
  Simulator sim(rc.topo, cfg);
  ReconConfig r;
  r.attacker = rc.attacker;
  r.peer = rc.peer;
  r.candidates = rc.candidates;
  const ReconPlan plan = schedule_recon(sim, r);
  const Trace tr = sim.run(plan.end + 1'000'000);
  ReconRun out{analyze_recon(tr, plan), {}};
  DefaultRoutes routes(rc.topo);
  out.score = score_recon(out.result, rc.topo, routes, rc.attacker);
  return out;
}

}  // namespace oracle
