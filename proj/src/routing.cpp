#include "mirage/routing.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace mirage {

Path Path::reversed() const {
  Path p = *this;
  std::reverse(p.nodes.begin(), p.nodes.end());
  return p;
}

bool cost_then_lexicographic(const Path& x, const Path& y) {
  if (x.cost != y.cost) return x.cost < y.cost;
  return x.nodes < y.nodes;
}

std::vector<NodeId> DistanceMap::path_to(NodeId target) const {
  if (!reachable(target)) return {};
  std::vector<NodeId> out;
  for (NodeId n = target; n != kNoNode; n = prev[n]) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

WeightFn metric_weight(Metric m) {
  switch (m) {
    case Metric::HopCount:
      return [](const Link&) { return 1.0; };
    case Metric::LatencySum:
      return [](const Link& l) { return l.latency_ms; };
    case Metric::InverseCapacityMin:
      return [](const Link& l) { return 1.0 / l.capacity; };
  }
  return [](const Link&) { return 1.0; };
}

Combine metric_combine(Metric m) { return m == Metric::InverseCapacityMin ? Combine::Max : Combine::Sum; }

DistanceMap dijkstra(const Topology& topo, NodeId source, const WeightFn& weight, Combine combine) {
  const std::size_t n = topo.node_count();
  if (source >= n) throw ValidationError("dijkstra source does not exist");
  for (const Link& l : topo.links())
    if (weight(l) < 0) throw ValidationError("negative link weight");

  DistanceMap dm;
  dm.source = source;
  dm.dist.assign(n, kUnreachable);
  dm.prev.assign(n, kNoNode);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  dm.dist[source] = 0;
  q.emplace(0.0, source);
  while (!q.empty()) {
    auto [d, u] = q.top();
    q.pop();
    if (done[u]) continue;
    done[u] = true;
    for (const auto& [v, lid] : topo.neighbors(u)) {
      if (done[v]) continue;
      const double w = weight(topo.link(lid));
      const double alt = combine == Combine::Sum ? d + w : std::max(d, w);
      if (alt < dm.dist[v]) {
        dm.dist[v] = alt;
        dm.prev[v] = u;
        q.emplace(alt, v);
      } else if (alt == dm.dist[v] && u < dm.prev[v]) {
        dm.prev[v] = u;
      }
    }
  }
  return dm;
}

DistanceMap dijkstra(const Topology& topo, NodeId source, Metric m) {
  return dijkstra(topo, source, metric_weight(m), metric_combine(m));
}

double path_cost(const Topology& topo, std::span<const NodeId> nodes, Metric m) {
  double sum = 0;
  double min_cap = kUnreachable;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto lid = topo.find_link(nodes[i], nodes[i + 1]);
    if (!lid)
      throw ValidationError("no link between " + std::to_string(nodes[i]) + " and " +
                            std::to_string(nodes[i + 1]));
    const Link& l = topo.link(*lid);
    sum += m == Metric::LatencySum ? l.latency_ms : 1.0;
    min_cap = std::min(min_cap, l.capacity);
  }
  if (m == Metric::InverseCapacityMin) return nodes.size() < 2 ? 0.0 : 1.0 / min_cap;
  return sum;
}

namespace {

class PathEnumerator {
 public:
  PathEnumerator(const Topology& t, NodeId dst, int max_hops, int max_paths, Metric m)
      : topo_(t), dst_(dst), max_hops_(max_hops), max_paths_(max_paths), metric_(m),
        visited_(t.node_count(), false) {}

  Enumeration run(NodeId src) {
    dfs(src);
    return std::move(out_);
  }

 private:
  // Returns false once the count cap fired, to unwind the search.
  bool dfs(NodeId cur) {
    visited_[cur] = true;
    path_.push_back(cur);
    bool keep_going = true;
    if (cur == dst_) {
      if (static_cast<int>(out_.paths.size()) >= max_paths_) {
        out_.truncated = true;
        keep_going = false;
      } else {
        out_.paths.push_back({path_, path_cost(topo_, path_, metric_)});
      }
    } else if (static_cast<int>(path_.size()) - 1 >= max_hops_) {
      if (!out_.truncated && dst_reachable_avoiding_visited(cur)) out_.truncated = true;
    } else {
      for (const auto& [w, _] : topo_.neighbors(cur)) {
        if (visited_[w]) continue;
        if (!dfs(w)) {
          keep_going = false;
          break;
        }
      }
    }
    visited_[cur] = false;
    path_.pop_back();
    return keep_going;
  }

  bool dst_reachable_avoiding_visited(NodeId from) const {
    std::vector<bool> seen = visited_;
    std::deque<NodeId> q{from};
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (const auto& [v, _] : topo_.neighbors(u)) {
        if (v == dst_) return true;
        if (!seen[v]) {
          seen[v] = true;
          q.push_back(v);
        }
      }
    }
    return false;
  }

  const Topology& topo_;
  NodeId dst_;
  int max_hops_, max_paths_;
  Metric metric_;
  std::vector<bool> visited_;
  std::vector<NodeId> path_;
  Enumeration out_;
};

}  // namespace

Enumeration enumerate_all_paths(const Topology& topo, NodeId src, NodeId dst, int max_hops,
                                int max_paths, Metric m) {
  if (src >= topo.node_count() || dst >= topo.node_count())
    throw ValidationError("enumeration endpoint does not exist");
  if (src == dst) throw ValidationError("enumeration requires src != dst");
  if (max_hops < 1 || max_paths < 1) throw ValidationError("enumeration caps must be >= 1");
  return PathEnumerator(topo, dst, max_hops, max_paths, m).run(src);
}

PathPool::PathPool(NodeId src, NodeId dst, std::vector<Path> all_paths)
    : src_(src), dst_(dst), all_(std::move(all_paths)), available_(all_.size(), true) {
  if (all_.empty()) throw ValidationError("path pool needs at least one path");
}

std::size_t PathPool::available_count() const {
  return static_cast<std::size_t>(std::count(available_.begin(), available_.end(), true));
}

std::size_t PathPool::take(std::optional<std::size_t> skip) {
  auto best_among = [&](bool only_available) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < all_.size(); ++i) {
      if (only_available && !available_[i]) continue;
      if (skip && *skip == i) continue;
      if (!best || cost_then_lexicographic(all_[i], all_[*best])) best = i;
    }
    return best;
  };
  auto pick = best_among(true);
  if (!pick) {
    // Only the excluded path is left; start a new round early.
    std::fill(available_.begin(), available_.end(), true);
    pick = best_among(true);
  }
  available_[*pick] = false;
  if (std::none_of(available_.begin(), available_.end(), [](bool b) { return b; }))
    std::fill(available_.begin(), available_.end(), true);
  return *pick;
}

const Path& PathPool::select_next() { return all_[take(std::nullopt)]; }

const Path& PathPool::select_next_excluding(const Path& excluded) {
  if (all_.size() < 2) return select_next();
  std::optional<std::size_t> skip;
  for (std::size_t i = 0; i < all_.size(); ++i)
    if (all_[i] == excluded) skip = i;
  return all_[take(skip)];
}

PathPool make_path_pool(const Topology& topo, NodeId src, NodeId dst, Metric m, PoolCaps caps) {
  if (src == dst) {
    Path p{{src}, 0.0};
    return PathPool(src, dst, {p});
  }
  auto dm = dijkstra(topo, src, Metric::HopCount);
  if (!dm.reachable(dst)) throw ValidationError("no path between requested nodes");
  const int shortest = static_cast<int>(dm.dist[dst]);
  auto e = enumerate_all_paths(topo, src, dst, shortest + caps.extra_hops, caps.max_paths, m);
  return PathPool(src, dst, std::move(e.paths));
}

BridgeIndex::BridgeIndex(const Topology& topo) {
  const std::size_t n = topo.node_count();
  bridge_.assign(topo.link_count(), false);

  // Iterative Tarjan low-link over links (parallel links do not exist).
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    NodeId node;
    LinkId via;
    std::size_t next;
  };
  for (NodeId root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, std::numeric_limits<LinkId>::max(), 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nb = topo.neighbors(f.node);
      if (f.next < nb.size()) {
        const auto [v, lid] = nb[f.next++];
        if (lid == f.via) continue;
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({v, lid, 0});
        } else {
          low[f.node] = std::min(low[f.node], disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          NodeId parent = stack.back().node;
          low[parent] = std::min(low[parent], low[done.node]);
          if (low[done.node] > disc[parent]) bridge_[done.via] = true;
        }
      }
    }
  }

  comp_.assign(n, -1);
  for (NodeId s = 0; s < n; ++s) {
    if (comp_[s] >= 0) continue;
    const int c = static_cast<int>(comp_size_.size());
    comp_size_.push_back(0);
    std::deque<NodeId> q{s};
    comp_[s] = c;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      ++comp_size_[c];
      for (const auto& [v, lid] : topo.neighbors(u)) {
        if (bridge_[lid] || comp_[v] >= 0) continue;
        comp_[v] = c;
        q.push_back(v);
      }
    }
  }

  tree_.assign(comp_size_.size(), {});
  for (LinkId l = 0; l < topo.link_count(); ++l) {
    if (!bridge_[l]) continue;
    const Link& link = topo.link(l);
    tree_[comp_[link.a]].push_back({comp_[link.b], link.a, link.b});
    tree_[comp_[link.b]].push_back({comp_[link.a], link.b, link.a});
  }
}

std::vector<bool> BridgeIndex::alternates_from(NodeId u) const {
  const std::size_t n = comp_.size();
  std::vector<bool> out(n, false);
  struct State {
    bool seen = false;
    bool alt = false;  // some earlier component had entry != exit
    NodeId entry = kNoNode;
  };
  std::vector<State> st(comp_size_.size());
  std::deque<int> q;
  st[comp_[u]] = {true, false, u};
  q.push_back(comp_[u]);
  while (!q.empty()) {
    int c = q.front();
    q.pop_front();
    for (const TreeEdge& e : tree_[c]) {
      if (st[e.to].seen) continue;
      st[e.to] = {true, st[c].alt || st[c].entry != e.near_end, e.far_end};
      q.push_back(e.to);
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (v == u) continue;
    const State& s = st[comp_[v]];
    if (!s.seen) continue;
    out[v] = s.alt || s.entry != v;
  }
  return out;
}

bool BridgeIndex::has_alternate(NodeId u, NodeId v) const {
  if (u == v) return false;
  return alternates_from(u)[v];
}

bool has_alternate_path(const Topology& topo, NodeId src, NodeId dst) {
  return BridgeIndex(topo).has_alternate(src, dst);
}

const DistanceMap& DefaultRoutes::tree(NodeId source) {
  auto it = trees_.find(source);
  if (it == trees_.end()) it = trees_.emplace(source, dijkstra(topo_, source, metric_)).first;
  return it->second;
}

Path DefaultRoutes::route(NodeId src, NodeId dst) {
  const DistanceMap& dm = tree(src);
  if (!dm.reachable(dst)) throw ValidationError("no route between requested nodes");
  return {dm.path_to(dst), dm.dist[dst]};
}

}  // namespace mirage
