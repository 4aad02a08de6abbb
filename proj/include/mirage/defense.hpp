#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "mirage/routing.hpp"

namespace mirage {

enum class DefenseMode { Off, DetectOnly, Full };
enum class MitigationPolicy { AlwaysOn, OnAlert };

std::string_view to_string(DefenseMode m);
std::string_view to_string(MitigationPolicy p);

struct ProbeConfig {
  double probe_interval_s = 2.0;
  int max_probe_attempts = 2;

  SimTime interval_us() const { return ms_to_us(probe_interval_s * 1000.0); }
  void validate() const;
};

struct DefenseConfig {
  DefenseMode mode = DefenseMode::Off;
  int lambda = 5;
  ProbeConfig probe;
  MitigationPolicy policy = MitigationPolicy::AlwaysOn;
  int batch_size = 0;  // 0: probe every switch in one batch
  SimTime probe_start = 0;
  SimTime cycle_gap = 0;
  int max_cycles = 0;  // 0: keep probing until the horizon

  bool detection_enabled() const { return mode != DefenseMode::Off; }
  bool mitigation_enabled() const { return mode == DefenseMode::Full; }
  void validate() const;
};

struct Alert {
  NodeId sw = kNoNode;
  SimTime declared_at = 0;
  int probes_sent = 0;
  int cycle = 0;
};

/// One switch's pass through the probe-retry loop:
///
///   send probe; responded = false
///   for i in 1..maxProbeAttempts:
///     if responded: break
///     wait probeInterval; send probe
///   if not responded: declare the switch non-reachable
///
/// The driver calls start() and then step() at each returned wake-up time;
/// responses are fed through on_response().
class ProbeRound {
 public:
  ProbeRound(NodeId sw, ProbeConfig cfg) : sw_(sw), cfg_(cfg) {}

  struct Step {
    bool send_probe = false;
    bool finished = false;
    bool alert = false;
    SimTime wake_at = 0;  // valid while !finished
  };

  /// Sends the first probe at `now` and evaluates the first loop iteration.
  Step start(SimTime now);
  /// Wake-up after a probeInterval wait: re-probe, then evaluate the next
  /// loop iteration (or the final verdict once attempts are used up).
  Step step(SimTime now);
  void on_response(SimTime now);

  NodeId sw() const { return sw_; }
  bool responded() const { return responded_; }
  int probes_sent() const { return probes_; }
  SimTime started_at() const { return t0_; }
  std::optional<SimTime> first_response_at() const { return first_response_; }

 private:
  Step evaluate(SimTime now, bool just_sent);

  NodeId sw_;
  ProbeConfig cfg_;
  SimTime t0_ = 0;
  int iteration_ = 0;
  int probes_ = 0;
  bool responded_ = false;
  bool finished_ = false;
  std::optional<SimTime> first_response_;
};

/// Lazily-built path pools keyed by ordered (src, dst).
class PathPools {
 public:
  PathPools(const Topology& topo, Metric m = Metric::HopCount, PoolCaps caps = {})
      : topo_(topo), metric_(m), caps_(caps) {}

  PathPool& get(NodeId src, NodeId dst);

 private:
  const Topology& topo_;
  Metric metric_;
  PoolCaps caps_;
  std::map<std::pair<NodeId, NodeId>, PathPool> pools_;
};

struct RoutePair {
  Path forward;
  Path reverse;
  bool no_diversity = false;
};

/// Forward path from pool(src,dst); reverse path from pool(dst,src) that
/// differs from the reversed forward path whenever the pool allows it.
RoutePair asymmetric_route(PathPools& pools, NodeId src, NodeId dst);

enum class RuleKind { UniquePerPacketRule, RequestCommonRule, UseExistingCommonRule };
std::string_view to_string(RuleKind k);

struct RuleDecision {
  std::uint32_t packet_index = 0;
  RuleKind decision = RuleKind::RequestCommonRule;
  Path path;     // ingress switch .. egress switch
  Path reverse;  // egress switch .. ingress switch, for replies
  bool no_diversity = true;
};

/// Controller-side defense state: which mitigation is live and how new-flow
/// packets and control exchanges are routed. Timing lives in the simulator.
class MirageController {
 public:
  MirageController(const Topology& topo, DefenseConfig cfg, Metric m = Metric::HopCount,
                   PoolCaps caps = {});

  const DefenseConfig& config() const { return cfg_; }
  bool mitigation_active() const { return active_; }
  std::optional<SimTime> activated_at() const { return activated_at_; }

  /// Turns mitigation on (alert-triggered or operator policy). No-op unless
  /// the mode is Full.
  void activate_mitigation(SimTime now);
  void on_alert(const Alert& a);

  /// Rule decision for packet `index` of a flow that missed at `ingress`.
  /// `default_path` is the plain shortest route used while mitigation is off.
  RuleDecision on_new_flow_packet(std::uint32_t index, NodeId ingress, NodeId egress,
                                  bool has_common_rule, const Path& default_path);

  /// Control exchange between a switch and the controller: forward is
  /// switch->controller, reverse is controller->switch.
  RoutePair control_route(NodeId sw, const Path& default_forward);

  PathPools& pools() { return pools_; }

 private:
  const Topology& topo_;
  DefenseConfig cfg_;
  PathPools pools_;
  bool active_ = false;
  std::optional<SimTime> activated_at_;
};

}  // namespace mirage
