#include "mirage/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

namespace mirage {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Switch:
      return "switch";
    case NodeKind::Host:
      return "host";
    case NodeKind::Controller:
      return "controller";
  }
  return "?";
}

NodeId Topology::add_node(NodeKind kind, std::string label) {
  Node n;
  n.kind = kind;
  n.label = std::move(label);
  return add_node(std::move(n));
}

NodeId Topology::add_node(Node node) {
  nodes_.push_back(std::move(node));
  adj_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

std::pair<LinkId, bool> Topology::add_link(NodeId u, NodeId v, double capacity,
                                           double latency_ms, int queue_limit) {
  if (u >= nodes_.size() || v >= nodes_.size())
    throw ValidationError("link endpoint is not a declared node");
  if (u == v) throw ValidationError("self-loop on node " + std::to_string(u));
  if (auto existing = find_link(u, v)) {
    Link& l = links_[*existing];
    l.capacity = std::max(l.capacity, capacity);
    return {*existing, true};
  }
  Link l;
  l.a = std::min(u, v);
  l.b = std::max(u, v);
  l.capacity = capacity;
  l.latency_ms = latency_ms;
  l.queue_limit = queue_limit;
  links_.push_back(l);
  const auto id = static_cast<LinkId>(links_.size() - 1);
  auto insert_sorted = [](std::vector<Adjacency>& list, Adjacency a) {
    auto it = std::lower_bound(list.begin(), list.end(), a.neighbor,
                               [](const Adjacency& x, NodeId n) { return x.neighbor < n; });
    list.insert(it, a);
  };
  insert_sorted(adj_[u], {v, id});
  insert_sorted(adj_[v], {u, id});
  return {id, false};
}

std::optional<LinkId> Topology::find_link(NodeId u, NodeId v) const {
  if (u >= adj_.size()) return std::nullopt;
  const auto& list = adj_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Adjacency& x, NodeId n) { return x.neighbor < n; });
  if (it != list.end() && it->neighbor == v) return it->link;
  return std::nullopt;
}

std::vector<NodeId> Topology::switches() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].kind == NodeKind::Switch) out.push_back(i);
  return out;
}

std::vector<NodeId> Topology::hosts() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].kind == NodeKind::Host) out.push_back(i);
  return out;
}

std::optional<NodeId> Topology::find_by_label(std::string_view label) const {
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].label == label) return i;
  return std::nullopt;
}

NodeId Topology::attachment_switch(NodeId leaf) const {
  const Node& n = node(leaf);
  if (n.kind == NodeKind::Switch) return leaf;
  const auto& nb = neighbors(leaf);
  if (nb.size() != 1 || !is_switch(nb.front().neighbor))
    throw ValidationError("node '" + n.label + "' is not attached to exactly one switch");
  return nb.front().neighbor;
}

std::vector<std::vector<NodeId>> Topology::switch_components() const {
  std::vector<int> comp(nodes_.size(), -1);
  std::vector<std::vector<NodeId>> out;
  for (NodeId s = 0; s < nodes_.size(); ++s) {
    if (nodes_[s].kind != NodeKind::Switch || comp[s] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.emplace_back();
    std::deque<NodeId> q{s};
    comp[s] = c;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      out[c].push_back(u);
      for (const auto& [v, _] : adj_[u]) {
        if (nodes_[v].kind == NodeKind::Switch && comp[v] < 0) {
          comp[v] = c;
          q.push_back(v);
        }
      }
    }
    std::sort(out[c].begin(), out[c].end());
  }
  return out;
}

void Topology::validate() const {
  for (LinkId i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.a >= nodes_.size() || l.b >= nodes_.size())
      throw ValidationError("link " + std::to_string(i) + " has an undeclared endpoint");
    if (l.a == l.b) throw ValidationError("link " + std::to_string(i) + " is a self-loop");
    if (!(l.capacity > 0)) throw ValidationError("link " + std::to_string(i) + " capacity must be > 0");
    if (!(l.latency_ms >= 0))
      throw ValidationError("link " + std::to_string(i) + " latency must be >= 0");
    if (l.queue_limit < 1)
      throw ValidationError("link " + std::to_string(i) + " queue_limit must be >= 1");
  }
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind == NodeKind::Switch) continue;
    const auto& nb = adj_[i];
    if (nb.size() != 1 || !is_switch(nb.front().neighbor))
      throw ValidationError(std::string(to_string(n.kind)) + " '" + n.label +
                            "' must have exactly one link, to a switch");
  }
  if (controller_) {
    if (*controller_ >= nodes_.size() || nodes_[*controller_].kind != NodeKind::Controller)
      throw ValidationError("controller id does not name a controller node");
    if (!switches_connected())
      throw ValidationError("controller is not reachable from every switch");
  }
}

bool operator==(const Topology& x, const Topology& y) {
  if (x.name_ != y.name_ || x.nodes_.size() != y.nodes_.size() ||
      x.links_.size() != y.links_.size() || x.controller_ != y.controller_)
    return false;
  for (std::size_t i = 0; i < x.nodes_.size(); ++i) {
    const Node& a = x.nodes_[i];
    const Node& b = y.nodes_[i];
    if (a.kind != b.kind || a.label != b.label || a.gml_id != b.gml_id || a.attrs != b.attrs)
      return false;
  }
  // Links compared as sets keyed by endpoints; insertion order may differ.
  auto key = [](const Topology& t) {
    std::vector<std::tuple<NodeId, NodeId, double, double, int>> v;
    for (const Link& l : t.links_) v.emplace_back(l.a, l.b, l.capacity, l.latency_ms, l.queue_limit);
    std::sort(v.begin(), v.end());
    return v;
  };
  return key(x) == key(y);
}

std::string to_canonical_json(const Topology& topo) {
  nlohmann::json j;
  j["name"] = topo.name();
  j["source_format"] = topo.source_format() == SourceFormat::GML ? "GML" : "Synthetic";
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId i = 0; i < topo.node_count(); ++i) {
    const Node& n = topo.node(i);
    nlohmann::json jn;
    jn["id"] = i;
    jn["kind"] = std::string(to_string(n.kind));
    jn["label"] = n.label;
    if (n.gml_id) jn["gml_id"] = *n.gml_id;
    if (!n.attrs.empty()) jn["attrs"] = n.attrs;
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  std::vector<Link> links = topo.links();
  std::sort(links.begin(), links.end(),
            [](const Link& p, const Link& q) { return std::tie(p.a, p.b) < std::tie(q.a, q.b); });
  nlohmann::json jl = nlohmann::json::array();
  for (const Link& l : links) {
    jl.push_back({{"a", l.a},
                  {"b", l.b},
                  {"capacity_pkt_per_ms", l.capacity},
                  {"latency_ms", l.latency_ms},
                  {"queue_limit", l.queue_limit}});
  }
  j["links"] = std::move(jl);
  if (topo.controller()) j["controller"] = *topo.controller();
  return j.dump(2);
}

NodeId attach_host(Topology& topo, NodeId sw, std::string label, const LinkDefaults& d) {
  if (sw >= topo.node_count() || !topo.is_switch(sw))
    throw ValidationError("host attachment point is not a switch");
  NodeId h = topo.add_node(NodeKind::Host, std::move(label));
  topo.add_link(h, sw, d.capacity * d.access_capacity_factor, d.latency_ms, d.queue_limit);
  return h;
}

Topology attach_hosts(const Topology& topo, int count, std::uint64_t seed, const LinkDefaults& d) {
  if (count < 0) throw ValidationError("host count must be >= 0");
  const auto sw = topo.switches();
  if (sw.empty()) throw ValidationError("topology has no switches");
  Topology out = topo;
  Rng rng(seed);
  const std::size_t base = topo.hosts().size();
  for (int i = 0; i < count; ++i) {
    NodeId target = sw[rng.uniform(sw.size())];
    attach_host(out, target, "h" + std::to_string(base + i), d);
  }
  return out;
}

namespace {

std::vector<int> switch_bfs(const Topology& topo, NodeId src) {
  std::vector<int> dist(topo.node_count(), -1);
  std::deque<NodeId> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (const auto& [v, _] : topo.neighbors(u)) {
      if (topo.is_switch(v) && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

int switch_degree(const Topology& topo, NodeId s) {
  int d = 0;
  for (const auto& [v, _] : topo.neighbors(s))
    if (topo.is_switch(v)) ++d;
  return d;
}

}  // namespace

NodeId select_controller_switch(const Topology& topo, const ControllerPlacement& where) {
  const auto sw = topo.switches();
  if (sw.empty()) throw ValidationError("topology has no switches");
  if (!topo.switches_connected())
    throw ValidationError("controller placement requires a connected switch graph");
  return std::visit(
      [&](const auto& w) -> NodeId {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, AtNode>) {
          if (w.node >= topo.node_count() || !topo.is_switch(w.node))
            throw ValidationError("controller placement node is not a switch");
          return w.node;
        } else if constexpr (std::is_same_v<W, MaxDegree>) {
          NodeId best = sw.front();
          for (NodeId s : sw)
            if (switch_degree(topo, s) > switch_degree(topo, best)) best = s;
          return best;
        } else {
          NodeId best = sw.front();
          int best_ecc = std::numeric_limits<int>::max();
          for (NodeId s : sw) {
            auto dist = switch_bfs(topo, s);
            int ecc = 0;
            for (NodeId t : sw) ecc = std::max(ecc, dist[t]);
            if (ecc < best_ecc) {
              best_ecc = ecc;
              best = s;
            }
          }
          return best;
        }
      },
      where);
}

Topology place_controller(const Topology& topo, const ControllerPlacement& where,
                          const LinkDefaults& d) {
  if (topo.controller()) throw ValidationError("topology already has a controller");
  const NodeId sw = select_controller_switch(topo, where);
  Topology out = topo;
  NodeId c = out.add_node(NodeKind::Controller, "controller");
  out.add_link(c, sw, d.capacity * d.access_capacity_factor, d.latency_ms, d.queue_limit);
  out.set_controller(c);
  return out;
}

namespace build {

Topology from_edges(int n, const std::vector<std::pair<int, int>>& edges, const LinkDefaults& d) {
  Topology t("synthetic");
  for (int i = 0; i < n; ++i) t.add_node(NodeKind::Switch, "s" + std::to_string(i));
  for (auto [u, v] : edges)
    t.add_link(static_cast<NodeId>(u), static_cast<NodeId>(v), d.capacity, d.latency_ms,
               d.queue_limit);
  return t;
}

Topology path(int n, const LinkDefaults& d) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  auto t = from_edges(n, e, d);
  t.set_name("path" + std::to_string(n));
  return t;
}

Topology ring(int n, const LinkDefaults& d) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  auto t = from_edges(n, e, d);
  t.set_name("ring" + std::to_string(n));
  return t;
}

Topology star(int leaves, const LinkDefaults& d) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  auto t = from_edges(leaves + 1, e, d);
  t.set_name("star" + std::to_string(leaves));
  return t;
}

Topology complete(int n, const LinkDefaults& d) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  auto t = from_edges(n, e, d);
  t.set_name("complete" + std::to_string(n));
  return t;
}

Topology dumbbell(int side, const LinkDefaults& d) {
  std::vector<std::pair<int, int>> e{{0, 1}};
  int next = 2;
  for (int hub = 0; hub < 2; ++hub)
    for (int i = 0; i < side; ++i) e.emplace_back(hub, next++);
  auto t = from_edges(next, e, d);
  t.set_name("dumbbell" + std::to_string(side));
  return t;
}

Topology random_connected(int n, int extra_edges, std::uint64_t seed, const LinkDefaults& d) {
  Rng rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform(i + 1)]);
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    int u = order[i], v = order[rng.uniform(i)];
    edges.emplace(std::min(u, v), std::max(u, v));
  }
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  int added = 0;
  while (added < extra_edges && static_cast<long long>(edges.size()) < max_edges) {
    int u = static_cast<int>(rng.uniform(n)), v = static_cast<int>(rng.uniform(n));
    if (u == v) continue;
    if (edges.emplace(std::min(u, v), std::max(u, v)).second) ++added;
  }
  auto t = from_edges(n, {edges.begin(), edges.end()}, d);
  t.set_name("random" + std::to_string(n) + "_" + std::to_string(seed));
  return t;
}

}  // namespace build

}  // namespace mirage
