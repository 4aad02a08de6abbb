#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mirage/topology.hpp"

namespace mirage {

enum class Metric { HopCount, LatencySum, InverseCapacityMin };

struct Path {
  std::vector<NodeId> nodes;
  double cost = 0;

  std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  Path reversed() const;
  friend bool operator==(const Path& x, const Path& y) { return x.nodes == y.nodes; }
};

/// Orders by (cost, node sequence); the selection order of a path pool.
bool cost_then_lexicographic(const Path& x, const Path& y);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct DistanceMap {
  NodeId source = kNoNode;
  std::vector<double> dist;  // kUnreachable when not reachable
  std::vector<NodeId> prev;  // kNoNode for the source and unreachable nodes

  bool reachable(NodeId n) const { return dist.at(n) != kUnreachable; }
  /// Node sequence source..target, empty when unreachable.
  std::vector<NodeId> path_to(NodeId target) const;
};

using WeightFn = std::function<double(const Link&)>;
WeightFn metric_weight(Metric m);

/// How link weights fold along a path: additive, or bottleneck (the path
/// costs its worst link).
enum class Combine { Sum, Max };
Combine metric_combine(Metric m);

/// Single-source shortest paths. Predecessor ties go to the lowest node id.
/// Throws ValidationError on a negative link weight.
DistanceMap dijkstra(const Topology& topo, NodeId source, const WeightFn& weight,
                     Combine combine = Combine::Sum);
DistanceMap dijkstra(const Topology& topo, NodeId source, Metric m = Metric::HopCount);

/// Recomputes a path's cost. Throws ValidationError if two consecutive nodes
/// are not linked.
double path_cost(const Topology& topo, std::span<const NodeId> nodes, Metric m);

struct Enumeration {
  std::vector<Path> paths;
  bool truncated = false;  // a hop or count cap excluded at least one path
};

/// Simple paths src->dst with at most `max_hops` edges, up to `max_paths`,
/// in DFS order with neighbors visited by ascending id.
Enumeration enumerate_all_paths(const Topology& topo, NodeId src, NodeId dst, int max_hops,
                                int max_paths, Metric m = Metric::HopCount);

struct PoolCaps {
  int extra_hops = 4;  // max_hops = shortest hop length + extra_hops
  int max_paths = 64;
};

/// Candidate paths for one ordered pair with exhaust-and-refill selection:
/// each call takes the cheapest still-available path; once every path has
/// been taken the pool is reinitialised.
class PathPool {
 public:
  PathPool(NodeId src, NodeId dst, std::vector<Path> all_paths);

  NodeId source() const { return src_; }
  NodeId destination() const { return dst_; }
  std::span<const Path> all_paths() const { return all_; }
  std::size_t size() const { return all_.size(); }
  std::size_t available_count() const;
  bool available(std::size_t i) const { return available_.at(i); }
  bool diverse() const { return all_.size() >= 2; }

  const Path& select_next();
  /// Like select_next but never returns `excluded` while another path exists.
  const Path& select_next_excluding(const Path& excluded);

 private:
  std::size_t take(std::optional<std::size_t> skip);

  NodeId src_, dst_;
  std::vector<Path> all_;
  std::vector<bool> available_;
};

/// Builds the pool for (src, dst) from capped enumeration. Throws
/// ValidationError when dst is unreachable.
PathPool make_path_pool(const Topology& topo, NodeId src, NodeId dst,
                        Metric m = Metric::HopCount, PoolCaps caps = {});

/// Bridge decomposition. Two vertices have two distinct simple paths iff, on
/// the bridge-tree route between them, some 2-edge-connected component is
/// entered and left through different vertices (the endpoints count as the
/// entry of the first and the exit of the last component).
class BridgeIndex {
 public:
  explicit BridgeIndex(const Topology& topo);

  bool is_bridge(LinkId l) const { return bridge_.at(l); }
  int component(NodeId n) const { return comp_.at(n); }
  std::size_t component_count() const { return comp_size_.size(); }
  std::size_t component_size(int c) const { return comp_size_.at(c); }

  bool has_alternate(NodeId u, NodeId v) const;
  /// result[v] == has_alternate(u, v) for every node v.
  std::vector<bool> alternates_from(NodeId u) const;

 private:
  struct TreeEdge {
    int to;
    NodeId near_end;  // bridge endpoint inside the current component
    NodeId far_end;   // bridge endpoint inside `to`
  };
  std::vector<bool> bridge_;
  std::vector<int> comp_;
  std::vector<std::size_t> comp_size_;
  std::vector<std::vector<TreeEdge>> tree_;
};

bool has_alternate_path(const Topology& topo, NodeId src, NodeId dst);

/// Cached shortest-path trees, one per source. Every route from a given
/// source is a branch of the same tree, so two routes from one node share a
/// prefix and never diverge and rejoin.
class DefaultRoutes {
 public:
  explicit DefaultRoutes(const Topology& topo, Metric m = Metric::HopCount)
      : topo_(topo), metric_(m) {}

  const DistanceMap& tree(NodeId source);
  /// Node sequence src..dst; throws ValidationError when unreachable.
  Path route(NodeId src, NodeId dst);

 private:
  const Topology& topo_;
  Metric metric_;
  std::map<NodeId, DistanceMap> trees_;
};

}  // namespace mirage
