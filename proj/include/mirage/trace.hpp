#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirage/defense.hpp"
#include "mirage/flow_table.hpp"

namespace mirage {

enum class Plane : std::uint8_t { Data, Control };
enum class PacketType : std::uint8_t {
  Data,
  Echo,
  ArpRequest,
  ArpReply,
  PacketIn,
  FlowMod,
  PacketOut,
  ProbeRequest,
  ProbeReply,
};
enum class FlowKind : std::uint8_t { Cbr, Ping, Arp };

std::string_view to_string(Plane p);
std::string_view to_string(PacketType t);
std::string_view to_string(FlowKind k);
Plane plane_of(PacketType t);

enum class EventKind : std::uint8_t {
  FlowStart,
  HostSend,
  PacketArrive,
  PacketDepart,
  Drop,
  ControllerDone,
  RuleInstall,
  RuleExpire,
  BufferTimeout,
  EchoTimeout,
  ProbeSend,
  ProbeReply,
  ProbeTimeout,
  Alert,
  Mitigation,
  BurstStart,
  BurstEnd,
};
std::string_view to_string(EventKind k);

struct TraceEvent {
  SimTime t = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::PacketArrive;
  PacketId packet = 0;
  PacketType type = PacketType::Data;
  FlowId flow = 0;
  std::uint32_t index = 0;
  NodeId node = kNoNode;
  NodeId peer = kNoNode;
  SimTime aux = 0;          // departure/delivery time, entry count, ...
  const char* note = "";    // static strings only (drop reasons, marker labels)
};

struct RttSample {
  FlowId flow = 0;
  std::uint32_t index = 0;
  SimTime rtt_us = -1;
  bool timed_out = false;

  double rtt_ms() const { return timed_out ? -1.0 : us_to_ms(rtt_us); }
};

struct ControllerCounters {
  std::uint64_t packet_ins = 0;         // every switch->controller request
  std::uint64_t path_requests = 0;      // packet-ins for flow packets
  std::uint64_t unique_requests = 0;
  std::uint64_t common_requests = 0;
  std::uint64_t existing_common = 0;
  std::uint64_t arp_requests = 0;
  std::uint64_t flow_mods = 0;          // rule-install messages
  std::uint64_t packet_outs = 0;
  std::uint64_t rule_entries = 0;       // entries written across switches
  std::uint64_t probes_sent = 0;
  std::uint64_t probe_replies = 0;

  std::uint64_t messages() const { return packet_ins + flow_mods + packet_outs; }
};

struct FlowStats {
  FlowId id = 0;
  FlowKind kind = FlowKind::Ping;
  std::string tag;
  NodeId src = kNoNode, dst = kNoNode;
  std::uint32_t sent = 0;
  std::uint32_t delivered = 0;     // reached dst
  std::uint32_t echoes = 0;        // replies back at src
  std::uint32_t timeouts = 0;
  std::uint32_t path_requests = 0;
  std::uint32_t unique_requests = 0;
  std::uint32_t common_requests = 0;
  std::uint32_t per_packet_phase = 0;  // packets sent with index <= lambda while mitigation is live
  bool decoy = false;                  // attack traffic
};

struct Conservation {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t on_links = 0;
  std::uint64_t buffered = 0;
  std::uint64_t at_controller = 0;

  std::uint64_t in_flight() const { return on_links + buffered + at_controller; }
  bool balanced() const { return injected == delivered + dropped + in_flight(); }
};

struct DropCounts {
  std::uint64_t queue_overflow = 0;
  std::uint64_t buffer_timeout = 0;
  std::uint64_t unresponsive = 0;
  std::uint64_t control_queue_overflow = 0;  // subset of queue_overflow
  std::uint64_t probe_losses = 0;            // probe requests/replies lost
};

struct ProbeRecord {
  NodeId sw = kNoNode;
  int cycle = 0;
  SimTime started_at = 0;
  SimTime finished_at = 0;
  std::optional<SimTime> first_response_at;
  int probes_sent = 0;
  bool alert = false;
  bool truly_unresponsive = false;
};

struct DecisionRecord {
  SimTime t = 0;
  FlowId flow = 0;
  std::uint32_t index = 0;
  Direction dir = Direction::Forward;
  NodeId sw = kNoNode;
  RuleKind kind = RuleKind::RequestCommonRule;
  std::vector<NodeId> path;
  std::vector<NodeId> reverse;
  bool no_diversity = true;
};

struct ControlLeg {
  SimTime t = 0;
  FlowId flow = 0;
  std::uint32_t index = 0;
  std::vector<NodeId> forward;  // switch -> controller
  std::vector<NodeId> reverse;  // controller -> switch
};

struct ProcessingDelay {
  FlowId flow = 0;
  std::uint32_t index = 0;
  NodeId sw = kNoNode;
  SimTime waited_us = 0;
};

struct RuleCountPoint {
  SimTime t = 0;
  std::size_t entries = 0;
};

struct LinkUtilization {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  std::vector<SimTime> busy_us;  // per bucket
};

struct Trace {
  SimTime horizon = 0;
  SimTime bucket_us = 0;
  std::vector<TraceEvent> events;
  std::vector<RttSample> rtts;
  std::vector<FlowStats> flows;
  ControllerCounters controller;
  Conservation conservation;
  DropCounts drops;
  std::vector<ProbeRecord> probes;
  std::vector<Alert> alerts;
  std::optional<SimTime> mitigation_at;
  std::vector<DecisionRecord> decisions;
  std::vector<ControlLeg> control_legs;
  std::vector<ProcessingDelay> processing;
  std::vector<RuleCountPoint> rule_counts;
  std::size_t peak_rule_entries = 0;
  std::vector<LinkUtilization> utilization;
  std::uint64_t control_packets_from_hosts = 0;  // stays 0: hosts only speak data plane

  std::vector<RttSample> rtts_of(FlowId f) const;
  /// Fraction of bucket time the directed link was busy.
  double utilization_of(NodeId from, NodeId to, std::size_t bucket) const;
};

struct TraceHeader {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// JSON-lines: a header line, one line per event, then a summary line.
void write_jsonl(std::ostream& os, const Trace& tr, const TraceHeader& h);
void write_rtt_csv(std::ostream& os, const Trace& tr, const TraceHeader& h);
void write_utilization_csv(std::ostream& os, const Trace& tr, const TraceHeader& h);

}  // namespace mirage
