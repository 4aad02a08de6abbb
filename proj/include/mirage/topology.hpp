#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mirage/common.hpp"

namespace mirage {

enum class NodeKind { Switch, Host, Controller };
enum class SourceFormat { GML, Synthetic };

std::string_view to_string(NodeKind kind);

struct LinkDefaults {
  double capacity = 100.0;        // packets per simulated ms
  double latency_ms = 1.0;
  int queue_limit = 1000;
  double access_capacity_factor = 10.0;  // host/controller links
};

struct Link {
  NodeId a = kNoNode;  // a < b
  NodeId b = kNoNode;
  double capacity = 100.0;
  double latency_ms = 1.0;
  int queue_limit = 1000;

  NodeId other(NodeId n) const { return n == a ? b : a; }
};

struct Node {
  NodeKind kind = NodeKind::Switch;
  std::string label;
  std::optional<long long> gml_id;
  // Pass-through attributes from the source file (coordinates, country...).
  std::map<std::string, std::string> attrs;
};

struct Adjacency {
  NodeId neighbor;
  LinkId link;
};

/// Undirected physical graph of switches, hosts and at most one controller.
/// Node ids are dense indices; switches parsed from GML come first, ordered
/// by their GML id. Adjacency lists are kept sorted by neighbor id.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::string name, SourceFormat fmt = SourceFormat::Synthetic)
      : name_(std::move(name)), format_(fmt) {}

  NodeId add_node(NodeKind kind, std::string label);
  NodeId add_node(Node node);
  // Adds a link, or merges into an existing one between the same endpoints
  // (keeping the larger capacity). Returns the link id and whether it merged.
  std::pair<LinkId, bool> add_link(NodeId u, NodeId v, double capacity,
                                   double latency_ms, int queue_limit);

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  SourceFormat source_format() const { return format_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }
  const Link& link(LinkId id) const { return links_.at(id); }
  Link& link(LinkId id) { return links_.at(id); }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Adjacency>& neighbors(NodeId id) const { return adj_.at(id); }
  std::optional<LinkId> find_link(NodeId u, NodeId v) const;

  std::vector<NodeId> switches() const;
  std::vector<NodeId> hosts() const;
  std::optional<NodeId> controller() const { return controller_; }
  bool is_switch(NodeId id) const { return nodes_.at(id).kind == NodeKind::Switch; }
  std::optional<NodeId> find_by_label(std::string_view label) const;

  /// Switch a host or the controller hangs off.
  NodeId attachment_switch(NodeId leaf) const;

  // Connected components over switches only, each sorted, ordered by
  // smallest member.
  std::vector<std::vector<NodeId>> switch_components() const;
  bool switches_connected() const { return switch_components().size() <= 1; }

  /// Checks every invariant; throws ValidationError on the first violation.
  void validate() const;

  void set_controller(NodeId id) { controller_ = id; }

  friend bool operator==(const Topology& x, const Topology& y);

 private:
  std::string name_;
  SourceFormat format_ = SourceFormat::Synthetic;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<Adjacency>> adj_;
  std::optional<NodeId> controller_;
};

struct ParseReport {
  std::size_t duplicate_edges = 0;  // collapsed multi-edges
  std::size_t self_loops = 0;       // dropped
  std::size_t components = 0;       // over switches
  bool connected() const { return components <= 1; }
};

struct ParsedTopology {
  Topology topology;
  ParseReport report;
};

/// Parses Topology Zoo style GML. Throws ParseError (with line) on malformed
/// text and ValidationError on edges referencing undeclared nodes.
ParsedTopology parse_gml(std::string_view text, const LinkDefaults& defaults = {});
ParsedTopology load_gml_file(const std::string& path, const LinkDefaults& defaults = {});

/// GML rendering that parse_gml reads back to an equal switch graph.
std::string write_gml(const Topology& topo);

/// Canonical JSON dump: sorted keys, nodes and links in id order.
std::string to_canonical_json(const Topology& topo);

Topology attach_hosts(const Topology& topo, int count, std::uint64_t seed,
                      const LinkDefaults& defaults = {});
/// Attaches one named host to a given switch.
NodeId attach_host(Topology& topo, NodeId sw, std::string label,
                   const LinkDefaults& defaults = {});

struct MaxDegree {};
struct Centroid {};
struct AtNode {
  NodeId node;
};
using ControllerPlacement = std::variant<MaxDegree, Centroid, AtNode>;

/// Adds the controller node on an access link to the selected switch.
/// Throws ValidationError if the switch graph is disconnected.
Topology place_controller(const Topology& topo, const ControllerPlacement& where,
                          const LinkDefaults& defaults = {});
NodeId select_controller_switch(const Topology& topo, const ControllerPlacement& where);

// Synthetic builders used by tests and the bundled scenarios. Node labels
// are "s0", "s1", ...
namespace build {
Topology path(int n, const LinkDefaults& d = {});
Topology ring(int n, const LinkDefaults& d = {});
Topology star(int leaves, const LinkDefaults& d = {});
Topology complete(int n, const LinkDefaults& d = {});
/// Two stars of `side` leaves whose hubs are joined by one bottleneck link.
/// Hubs are s0 (left) and s1 (right).
Topology dumbbell(int side, const LinkDefaults& d = {});
/// Random connected graph: a random spanning tree plus `extra_edges` chords.
Topology random_connected(int n, int extra_edges, std::uint64_t seed,
                          const LinkDefaults& d = {});
Topology from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                    const LinkDefaults& d = {});
}  // namespace build

}  // namespace mirage
