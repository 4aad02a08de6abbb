#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mirage/simulator.hpp"

namespace mirage {

struct ReconConfig {
  NodeId attacker = kNoNode;
  NodeId peer = kNoNode;  // measurement host on the attacker's own switch
  std::vector<NodeId> candidates;
  double burst_rate_pkt_per_ms = 200.0;
  SimTime burst_duration_us = 20'000;
  SimTime burst_offset_us = 5'000;   // probe flow starts this long after the burst
  SimTime warmup_lead_us = 10'000;   // lone packet that installs the burst flow's rules
  int trials = 5;
  double threshold_ms = 1.0;
  SimTime start_us = 0;
  SimTime slot_us = 200'000;

  void validate() const;
};

struct ReconSlot {
  NodeId candidate = kNoNode;
  int trial = 0;
  bool with_burst = false;
  SimTime at = 0;
  FlowId probe = 0;
  FlowId burst = 0;  // valid when with_burst
};

struct ReconPlan {
  ReconConfig cfg;
  std::vector<ReconSlot> slots;
  std::vector<std::pair<NodeId, std::string>> skipped;
  SimTime end = 0;
};

/// Queues the paired trials on `sim`: a two-packet probe flow to the peer,
/// alone (baseline) and during a burst towards the candidate.
ReconPlan schedule_recon(Simulator& sim, const ReconConfig& cfg);

struct CandidateVerdict {
  NodeId candidate = kNoNode;
  std::vector<double> baseline_deltas_ms;
  std::vector<double> burst_deltas_ms;
  double baseline_delta_ms = 0;  // median
  double burst_delta_ms = 0;     // median
  bool classified_shared = false;
  bool skipped = false;
  std::string skip_reason;
};

struct ReconResult {
  double threshold_ms = 0;
  std::vector<CandidateVerdict> candidates;
  std::vector<NodeId> inferred_shared;  // candidates whose route shares a link with the control channel

  const CandidateVerdict* find(NodeId c) const;
};

/// Reads only the attacker's own RTT samples.
ReconResult analyze_recon(const Trace& tr, const ReconPlan& plan);

double median(std::vector<double> v);

using DirectedLink = std::pair<NodeId, NodeId>;

/// Directed links shared by the data route attacker->candidate and the
/// control route from the attacker's switch to the controller.
std::set<DirectedLink> shared_links_ground_truth(const Topology& topo, DefaultRoutes& routes,
                                                 NodeId attacker, NodeId candidate);

struct ReconScore {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  int evaluated() const { return tp + fp + fn + tn; }
  double precision() const;  // 1 when nothing was predicted and nothing was shared
  double recall() const;     // 1 when nothing was shared
  double accuracy() const;
};

ReconScore score_recon(const ReconResult& r, const Topology& topo, DefaultRoutes& routes,
                       NodeId attacker);

struct AttackPlan {
  std::vector<std::pair<NodeId, NodeId>> target_links;  // undirected, by endpoint
  std::vector<NodeId> decoys;
  double rate_pkt_per_ms = 0;  // per target link
  SimTime start_us = 0;
  SimTime duration_us = 0;
};

struct FloodReport {
  struct Covered {
    std::pair<NodeId, NodeId> link;
    NodeId src = kNoNode, dst = kNoNode;
    FlowId flow = 0;
  };
  std::vector<Covered> covered;
  std::vector<std::pair<NodeId, NodeId>> uncoverable;
};

/// Schedules decoy-to-decoy data flows whose routes cross each target link.
FloodReport schedule_flood(Simulator& sim, const AttackPlan& plan);

}  // namespace mirage
