#include <gtest/gtest.h>

#include <sstream>

#include "mirage/analysis.hpp"
#include "mirage/simulator.hpp"

using namespace mirage;

namespace {

struct Net {
  Topology topo;
  NodeId a = kNoNode, b = kNoNode;
};

Net line(int switches) {
  Net n;
  n.topo = place_controller(build::path(switches), AtNode{0});
  n.a = attach_host(n.topo, 0, "a");
  n.b = attach_host(n.topo, static_cast<NodeId>(switches - 1), "b");
  return n;
}

Net ring6() {
  Net n;
  n.topo = place_controller(build::ring(6), AtNode{0});
  n.a = attach_host(n.topo, 1, "a");
  n.b = attach_host(n.topo, 4, "b");
  return n;
}

SimConfig defended(int lambda) {
  SimConfig c;
  c.defense.mode = DefenseMode::Full;
  c.defense.lambda = lambda;
  c.defense.max_cycles = 1;
  c.defense.probe_start = 10'000'000;  // keep probes out of the accounting window
  return c;
}

FlowSpec cbr(NodeId a, NodeId b, std::uint32_t packets, double rate = 0.2) {
  FlowSpec f;
  f.kind = FlowKind::Cbr;
  f.src = a;
  f.dst = b;
  f.start = 1000;
  f.packets = packets;
  f.rate_pkt_per_ms = rate;
  return f;
}

std::string jsonl(const Trace& tr) {
  std::ostringstream os;
  write_jsonl(os, tr, {"t", 1, "h"});
  return os.str();
}

}  // namespace

TEST(Simulator, LambdaFiveTenPacketFlowMakesSixRequests) {
  for (bool diverse : {false, true}) {
    const Net n = diverse ? ring6() : line(4);
    Simulator sim(n.topo, defended(5));
    const FlowId f = sim.add_flow(cbr(n.a, n.b, 10));
    const Trace tr = sim.run(1'000'000);
    const FlowStats& s = tr.flows.at(f);
    EXPECT_EQ(s.delivered, 10u);
    EXPECT_EQ(s.path_requests, 6u) << (diverse ? "ring" : "line");
    EXPECT_EQ(s.unique_requests, 5u);
    EXPECT_EQ(s.common_requests, 1u);
    EXPECT_EQ(s.per_packet_phase, 5u);
    const OverheadSummary o = overhead_metrics(tr);
    EXPECT_DOUBLE_EQ(o.per_packet_ratio, 1.0);
    EXPECT_TRUE(tr.conservation.balanced());
  }
}

TEST(Simulator, OneRequestPerFlowWithoutPerPacketRules) {
  for (int mode = 0; mode < 2; ++mode) {
    const Net n = ring6();
    SimConfig c = mode == 0 ? SimConfig{} : defended(0);
    Simulator sim(n.topo, c);
    const FlowId f1 = sim.add_flow(cbr(n.a, n.b, 20, 1));
    const FlowId f2 = sim.add_flow(cbr(n.b, n.a, 7, 1));
    const Trace tr = sim.run(1'000'000);
    EXPECT_EQ(tr.flows.at(f1).path_requests, 1u);
    EXPECT_EQ(tr.flows.at(f2).path_requests, 1u);
    EXPECT_EQ(tr.flows.at(f1).delivered, 20u);
  }
}

TEST(Simulator, MessagesGrowWithLambda) {
  std::uint64_t last_msgs = 0, last_rules = 0;
  for (int lambda : {0, 2, 5, 10}) {
    const Net n = ring6();
    Simulator sim(n.topo, defended(lambda));
    sim.add_flow(cbr(n.a, n.b, 12));
    const Trace tr = sim.run(1'000'000);
    const auto o = overhead_metrics(tr);
    EXPECT_GE(o.controller_messages, last_msgs);
    EXPECT_GE(o.rule_entries_installed, last_rules);
    if (lambda > 0) EXPECT_GT(o.controller_messages, last_msgs);
    last_msgs = o.controller_messages;
    last_rules = o.rule_entries_installed;
  }
}

TEST(Simulator, PingRttMatchesLinkArithmetic) {
  const Net n = line(2);
  Simulator sim(n.topo, SimConfig{});
  FlowSpec p;
  p.kind = FlowKind::Ping;
  p.src = n.a;
  p.dst = n.b;
  p.start = 0;
  p.packets = 3;
  const FlowId f = sim.add_flow(p);
  const Trace tr = sim.run(1'000'000);
  const auto r = tr.rtts_of(f);
  ASSERT_EQ(r.size(), 3u);
  // host-s0, s0-s1, s1-host each way: 1 ms latency, 1/10/1 us service.
  EXPECT_EQ(r[1].rtt_us, 2 * (3000 + 1 + 10 + 1));
  EXPECT_EQ(r[2].rtt_us, r[1].rtt_us);
  EXPECT_GT(r[0].rtt_us, r[1].rtt_us);
}

TEST(Simulator, ConservationHoldsUnderOverload) {
  Rng rng(8);
  for (int run = 0; run < 20; ++run) {
    Topology t = place_controller(build::random_connected(6 + run % 5, run % 4, rng.next()), MaxDegree{});
    t = attach_hosts(t, 6, rng.next());
    SimConfig c = run % 2 ? defended(3) : SimConfig{};
    c.record_events = false;
    Simulator sim(t, c);
    const auto hosts = t.hosts();
    for (int i = 0; i < 8; ++i) {
      const NodeId a = hosts[rng.uniform(hosts.size())];
      NodeId b = hosts[rng.uniform(hosts.size())];
      if (a == b) continue;
      sim.add_flow(cbr(a, b, 2000, 150));
    }
    const Trace tr = sim.run(static_cast<SimTime>(5'000 + rng.uniform(30'000)));
    const auto& k = tr.conservation;
    EXPECT_TRUE(k.balanced()) << "run " << run << ": " << k.injected << " != " << k.delivered << "+" << k.dropped
                              << "+" << k.in_flight();
    EXPECT_EQ(tr.control_packets_from_hosts, 0u);
  }
}

TEST(Simulator, IdenticalSeedsGiveIdenticalTraces) {
  auto once = [] {
    Topology t = place_controller(build::random_connected(10, 4, 99), MaxDegree{});
    t = attach_hosts(t, 5, 99);
    Simulator sim(t, defended(3));
    const auto h = t.hosts();
    sim.add_flow(cbr(h[0], h[3], 30, 5));
    sim.add_flow(cbr(h[1], h[4], 30, 50));
    return jsonl(sim.run(200'000));
  };
  const std::string a = once();
  EXPECT_GT(a.size(), 1000u);
  EXPECT_EQ(a, once());
}

TEST(Simulator, BlackholedSwitchAlertsOnSchedule) {
  const Net n = ring6();
  SimConfig c;
  c.defense.mode = DefenseMode::DetectOnly;
  c.defense.max_cycles = 1;
  Simulator sim(n.topo, c);
  sim.set_unresponsive(3);
  const Trace tr = sim.run(10'000'000);
  ASSERT_EQ(tr.alerts.size(), 1u);
  EXPECT_EQ(tr.alerts[0].sw, 3u);
  EXPECT_EQ(tr.alerts[0].probes_sent, 3);
  EXPECT_EQ(tr.alerts[0].declared_at, 2 * c.defense.probe.interval_us());
  const auto m = detection_metrics(tr);
  EXPECT_EQ(m.tp, 1);
  EXPECT_EQ(m.fn, 0);
  EXPECT_EQ(m.fp, 0);
  EXPECT_EQ(m.tn, 5);
}

TEST(Simulator, RejectsBadFlowsAndReuse) {
  const Net n = line(3);
  Simulator sim(n.topo, SimConfig{});
  FlowSpec bad = cbr(n.a, n.a, 1);
  EXPECT_THROW(sim.add_flow(bad), Error);
  bad = cbr(n.a, 1, 1);
  EXPECT_THROW(sim.add_flow(bad), Error);
  sim.run(1000);
  EXPECT_THROW(sim.run(1000), Error);
}
