#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mirage/routing.hpp"
#include "oracles.hpp"

using namespace mirage;

namespace {

Topology weighted(Rng& rng, int n) {
  Topology t = oracle::random_graph(rng, n, 0.3);
  for (LinkId l = 0; l < t.link_count(); ++l) {
    t.link(l).latency_ms = 0.5 + static_cast<double>(rng.uniform(20));
    t.link(l).capacity = 1.0 + static_cast<double>(rng.uniform(200));
  }
  return t;
}

}  // namespace

TEST(Dijkstra, MatchesBellmanFordOnRandomGraphs) {
  Rng rng(101);
  for (int g = 0; g < 200; ++g) {
    const Topology t = weighted(rng, 2 + static_cast<int>(rng.uniform(14)));
    for (Metric m : {Metric::HopCount, Metric::LatencySum, Metric::InverseCapacityMin}) {
      const WeightFn w = metric_weight(m);
      for (NodeId s = 0; s < t.node_count(); ++s) {
        const auto dm = dijkstra(t, s, m);
        const auto bf = oracle::bellman_ford(t, s, w, metric_combine(m));
        for (NodeId v = 0; v < t.node_count(); ++v) {
          ASSERT_NEAR(dm.dist[v], bf[v], 1e-9) << "graph " << g << " " << s << "->" << v;
          const auto p = dm.path_to(v);
          ASSERT_FALSE(p.empty());
          EXPECT_NEAR(path_cost(t, p, m), dm.dist[v], 1e-9);
        }
      }
    }
  }
}

TEST(Dijkstra, UnreachableAndTieBreak) {
  Topology t = build::from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const NodeId lone = t.add_node(NodeKind::Switch, "lone");
  const auto d = dijkstra(t, 0);
  EXPECT_FALSE(d.reachable(lone));
  EXPECT_TRUE(d.path_to(lone).empty());
  EXPECT_EQ(d.path_to(3), (std::vector<NodeId>{0, 1, 3}));
}

TEST(Dijkstra, RejectsNegativeWeights) {
  const Topology t = build::path(3);
  EXPECT_THROW(dijkstra(t, 0, [](const Link&) { return -1.0; }), ValidationError);
}

TEST(Enumerate, SmallGraphCounts) {
  EXPECT_EQ(enumerate_all_paths(build::complete(4), 0, 3, 10, 1000).paths.size(), 5u);
  EXPECT_EQ(enumerate_all_paths(build::complete(3), 0, 2, 10, 1000).paths.size(), 2u);
  EXPECT_EQ(enumerate_all_paths(build::path(5), 0, 4, 10, 1000).paths.size(), 1u);
  const auto tri = enumerate_all_paths(build::complete(3), 0, 2, 10, 1000);
  EXPECT_EQ(tri.paths[0].nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(tri.paths[1].nodes, (std::vector<NodeId>{0, 2}));
  for (const auto& p : enumerate_all_paths(build::complete(5), 0, 4, 10, 1000).paths)
    EXPECT_DOUBLE_EQ(p.cost, path_cost(build::complete(5), p.nodes, Metric::HopCount));
}

TEST(Enumerate, MatchesRecursiveOracleOnRandomGraphs) {
  Rng rng(202);
  for (int g = 0; g < 200; ++g) {
    const Topology t = oracle::random_graph(rng, 2 + static_cast<int>(rng.uniform(9)), 0.35);
    const NodeId s = static_cast<NodeId>(rng.uniform(t.node_count()));
    NodeId d = static_cast<NodeId>(rng.uniform(t.node_count()));
    if (d == s) d = (s + 1) % t.node_count();
    const auto e = enumerate_all_paths(t, s, d, static_cast<int>(t.node_count()), 1'000'000);
    ASSERT_FALSE(e.truncated);
    std::set<std::vector<NodeId>> got;
    for (const auto& p : e.paths) got.insert(p.nodes);
    EXPECT_EQ(got.size(), e.paths.size()) << "duplicate path, graph " << g;
    EXPECT_EQ(got, oracle::all_simple_paths(t, s, d)) << "graph " << g;
  }
}

TEST(Enumerate, CapsTruncate) {
  const Topology t = build::complete(6);
  const auto by_count = enumerate_all_paths(t, 0, 5, 5, 3);
  EXPECT_EQ(by_count.paths.size(), 3u);
  EXPECT_TRUE(by_count.truncated);
  const auto by_hops = enumerate_all_paths(t, 0, 5, 1, 100);
  ASSERT_EQ(by_hops.paths.size(), 1u);
  EXPECT_TRUE(by_hops.truncated);
}

TEST(PathPool, ExhaustThenRefillForEverySizeUpToEight) {
  Rng rng(303);
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<Path> paths;
      for (int i = 0; i < n; ++i) {
        Path p;
        p.nodes = {0, static_cast<NodeId>(100 + i), 1};
        p.cost = static_cast<double>(rng.uniform(4));
        paths.push_back(p);
      }
      PathPool pool(0, 1, paths);
      std::vector<Path> sorted = paths;
      std::sort(sorted.begin(), sorted.end(), cost_then_lexicographic);
      std::set<std::vector<NodeId>> seen;
      double last = -1;
      for (int i = 0; i < n; ++i) {
        const Path& p = pool.select_next();
        EXPECT_GE(p.cost, last);
        last = p.cost;
        EXPECT_TRUE(seen.insert(p.nodes).second) << "repeat before exhaustion";
        EXPECT_EQ(p, sorted[i]);
      }
      EXPECT_EQ(seen.size(), static_cast<std::size_t>(n));
      EXPECT_EQ(pool.select_next(), sorted.front());
    }
  }
}

TEST(PathPool, ExcludingAvoidsTheGivenPath) {
  PathPool pool = make_path_pool(build::ring(4), 0, 2);
  ASSERT_EQ(pool.size(), 2u);
  const Path first = pool.all_paths()[0];
  for (int i = 0; i < 6; ++i) EXPECT_FALSE(pool.select_next_excluding(first) == first);
  PathPool single = make_path_pool(build::path(3), 0, 2);
  const Path only = single.all_paths()[0];
  EXPECT_EQ(single.select_next_excluding(only), only);
}

TEST(PathPool, UnreachableThrows) {
  Topology t = build::path(2);
  const NodeId lone = t.add_node(NodeKind::Switch, "lone");
  EXPECT_THROW(make_path_pool(t, 0, lone), ValidationError);
}

TEST(BridgeIndex, MatchesEnumerationOnRandomGraphs) {
  Rng rng(404);
  for (int g = 0; g < 200; ++g) {
    const Topology t = oracle::random_graph(rng, 2 + static_cast<int>(rng.uniform(10)), 0.2);
    const BridgeIndex bi(t);
    for (NodeId u = 0; u < t.node_count(); ++u) {
      const auto alt = bi.alternates_from(u);
      for (NodeId v = 0; v < t.node_count(); ++v) {
        if (u == v) continue;
        const auto e = enumerate_all_paths(t, u, v, static_cast<int>(t.node_count()), 1'000'000);
        ASSERT_FALSE(e.truncated);
        EXPECT_EQ(bi.has_alternate(u, v), e.paths.size() >= 2) << "graph " << g << " " << u << "," << v;
        EXPECT_EQ(alt[v], bi.has_alternate(u, v));
        EXPECT_EQ(has_alternate_path(t, u, v), e.paths.size() >= 2);
      }
    }
  }
}

TEST(BridgeIndex, CutVertexJoinedCyclesStillHaveAlternates) {
  // Two triangles sharing node 2: paths 0->4 go round both cycles.
  const Topology t = build::from_edges(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}});
  EXPECT_TRUE(has_alternate_path(t, 0, 4));
  // A bridge in between leaves a single route.
  const Topology b = build::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_FALSE(has_alternate_path(b, 0, 3));
}

TEST(DefaultRoutes, RoutesFromOneSourceArePrefixConsistent) {
  Rng rng(505);
  for (int g = 0; g < 50; ++g) {
    const Topology t = oracle::random_graph(rng, 3 + static_cast<int>(rng.uniform(10)), 0.3);
    DefaultRoutes routes(t);
    for (NodeId s = 0; s < t.node_count(); ++s) {
      for (NodeId a = 0; a < t.node_count(); ++a) {
        for (NodeId b = 0; b < t.node_count(); ++b) {
          const auto pa = routes.route(s, a).nodes;
          const auto pb = routes.route(s, b).nodes;
          // Once the two routes differ they never meet again.
          std::size_t i = 0;
          while (i < pa.size() && i < pb.size() && pa[i] == pb[i]) ++i;
          for (std::size_t x = i; x < pa.size(); ++x)
            EXPECT_EQ(std::find(pb.begin() + i, pb.end(), pa[x]), pb.end());
        }
      }
    }
  }
}
