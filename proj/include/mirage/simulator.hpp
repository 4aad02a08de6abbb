#pragma once

#include <memory>
#include <string>

#include "mirage/link_queue.hpp"
#include "mirage/trace.hpp"

namespace mirage {

struct SimConfig {
  SimTime controller_processing_us = 500;
  SimTime per_packet_hard_timeout_us = 50'000;
  SimTime common_idle_timeout_us = 5'000'000;
  SimTime common_hard_timeout_us = 0;
  SimTime buffer_timeout_us = 1'000'000;  // packets waiting for a rule longer than this are dropped
  SimTime echo_timeout_us = 1'000'000;
  SimTime utilization_bucket_us = 10'000;
  bool record_events = true;
  Metric metric = Metric::HopCount;
  PoolCaps pool_caps;
  DefenseConfig defense;
};

struct FlowSpec {
  FlowKind kind = FlowKind::Ping;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;  // unused for Arp
  SimTime start = 0;
  std::uint32_t packets = 1;
  double rate_pkt_per_ms = 1.0;  // Cbr
  SimTime first_gap_us = -1;     // Cbr: gap between packets 1 and 2, -1 = 1/rate
  SimTime gap_us = 0;            // Ping/Arp: pause after each reply before the next send
  std::string tag;
  bool decoy = false;
};

/// In-band SDN network: hosts exchange data packets through switches whose
/// tables the controller fills reactively; control messages travel the same
/// links and queues as data.
class Simulator {
 public:
  /// `topo` must be connected, have a controller and outlive the simulator.
  Simulator(const Topology& topo, SimConfig cfg);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  FlowId add_flow(const FlowSpec& f);
  const FlowSpec& flow(FlowId id) const;
  std::size_t flow_count() const;

  /// The switch keeps forwarding but its control agent is dead: control
  /// messages addressed to it are discarded and it never raises packet-ins.
  void set_unresponsive(NodeId sw);
  /// Timeline marker written to the event log (BurstStart/BurstEnd).
  void add_marker(SimTime t, EventKind kind, FlowId flow = 0);

  const Topology& topology() const;
  DefaultRoutes& routes();
  const SimConfig& config() const;

  /// Runs every event with time <= horizon. Single use.
  Trace run(SimTime horizon);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mirage
