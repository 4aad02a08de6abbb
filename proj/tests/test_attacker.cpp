#include <gtest/gtest.h>

#include "mirage/attacker.hpp"
#include "oracles.hpp"

using namespace mirage;

namespace {

struct Dumbbell {
  Topology topo;
  NodeId attacker, peer;
  std::vector<NodeId> left, right;
};

Dumbbell dumbbell() {
  Dumbbell d;
  d.topo = place_controller(build::dumbbell(3), AtNode{0});
  d.attacker = attach_host(d.topo, 1, "attacker");
  d.peer = attach_host(d.topo, 1, "peer");
  d.left = {attach_host(d.topo, 2, "l1"), attach_host(d.topo, 3, "l2")};
  d.right = {attach_host(d.topo, 5, "r1"), attach_host(d.topo, 6, "r2")};
  return d;
}

}  // namespace

TEST(Recon, GroundTruthOnDumbbell) {
  const Dumbbell d = dumbbell();
  DefaultRoutes routes(d.topo);
  for (NodeId c : d.left) {
    const auto s = shared_links_ground_truth(d.topo, routes, d.attacker, c);
    EXPECT_EQ(s, (std::set<DirectedLink>{{1, 0}}));
  }
  for (NodeId c : d.right) EXPECT_TRUE(shared_links_ground_truth(d.topo, routes, d.attacker, c).empty());
}

TEST(Recon, UndefendedDumbbellIsExact) {
  const Dumbbell d = dumbbell();
  oracle::ReconCase rc{d.topo, d.attacker, d.peer, {d.left[0], d.left[1], d.right[0], d.right[1]}, true};
  const auto run = oracle::run_recon(rc, DefenseMode::Off);
  EXPECT_EQ(run.score.tp, 2);
  EXPECT_EQ(run.score.tn, 2);
  EXPECT_DOUBLE_EQ(run.score.precision(), 1.0);
  EXPECT_DOUBLE_EQ(run.score.recall(), 1.0);
  for (const auto& v : run.result.candidates) {
    EXPECT_FALSE(v.skipped);
    EXPECT_EQ(v.burst_deltas_ms.size(), 5u);
  }
}

TEST(Recon, DefendedDumbbellLosesTheSignal) {
  const Dumbbell d = dumbbell();
  oracle::ReconCase rc{d.topo, d.attacker, d.peer, {d.left[0], d.left[1], d.right[0], d.right[1]}, true};
  const auto run = oracle::run_recon(rc, DefenseMode::Full);
  EXPECT_LE(run.score.accuracy(), 0.5);
}

TEST(Recon, CandidateOnTheAttackerSwitchIsDisjoint) {
  Dumbbell d = dumbbell();
  const NodeId local = attach_host(d.topo, 1, "local");
  oracle::ReconCase rc{d.topo, d.attacker, d.peer, {local, d.left[0]}, true};
  const auto run = oracle::run_recon(rc, DefenseMode::Off);
  const auto* v = run.result.find(local);
  ASSERT_NE(v, nullptr);
  EXPECT_FALSE(v->skipped);
  EXPECT_FALSE(v->classified_shared);
  EXPECT_EQ(run.score.tp, 1);
  EXPECT_EQ(run.score.tn, 1);
}

TEST(Recon, ConfigValidation) {
  ReconConfig c;
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ReconConfig{};
  c.burst_rate_pkt_per_ms = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Recon, ScoreEdgeCases) {
  ReconScore s;
  EXPECT_DOUBLE_EQ(s.precision(), 1.0);
  EXPECT_DOUBLE_EQ(s.recall(), 1.0);
  s.fn = 2;
  s.tn = 2;
  EXPECT_DOUBLE_EQ(s.precision(), 0.0);
  EXPECT_DOUBLE_EQ(s.recall(), 0.0);
  EXPECT_DOUBLE_EQ(s.accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Flood, DecoyFlowsCoverTargets) {
  Topology t = place_controller(build::dumbbell(2), AtNode{0});
  const NodeId a = attach_host(t, 2, "a");
  const NodeId b = attach_host(t, 4, "b");
  const NodeId c = attach_host(t, 5, "c");
  Simulator sim(t, SimConfig{});
  AttackPlan p;
  p.target_links = {{0, 1}, {2, 3}};
  p.decoys = {a, b, c};
  p.rate_pkt_per_ms = 50;
  p.duration_us = 20'000;
  const auto r = schedule_flood(sim, p);
  ASSERT_EQ(r.covered.size(), 1u);
  EXPECT_EQ(r.covered[0].link, (std::pair<NodeId, NodeId>{0, 1}));
  ASSERT_EQ(r.uncoverable.size(), 1u);
  const Trace tr = sim.run(100'000);
  EXPECT_GT(tr.flows.at(r.covered[0].flow).delivered, 0u);
  EXPECT_TRUE(tr.flows.at(r.covered[0].flow).decoy);
  EXPECT_EQ(tr.control_packets_from_hosts, 0u);
  p.decoys = {a, 1};
  Simulator sim2(t, SimConfig{});
  EXPECT_THROW(schedule_flood(sim2, p), Error);
}
