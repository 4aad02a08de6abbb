#include "mirage/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace mirage {

std::string_view to_string(Plane p) { return p == Plane::Data ? "data" : "control"; }

std::string_view to_string(PacketType t) {
  switch (t) {
    case PacketType::Data:
      return "data";
    case PacketType::Echo:
      return "echo";
    case PacketType::ArpRequest:
      return "arp_request";
    case PacketType::ArpReply:
      return "arp_reply";
    case PacketType::PacketIn:
      return "packet_in";
    case PacketType::FlowMod:
      return "flow_mod";
    case PacketType::PacketOut:
      return "packet_out";
    case PacketType::ProbeRequest:
      return "probe_request";
    case PacketType::ProbeReply:
      return "probe_reply";
  }
  return "?";
}

std::string_view to_string(FlowKind k) {
  switch (k) {
    case FlowKind::Cbr:
      return "cbr";
    case FlowKind::Ping:
      return "ping";
    case FlowKind::Arp:
      return "arp";
  }
  return "?";
}

Plane plane_of(PacketType t) {
  switch (t) {
    case PacketType::Data:
    case PacketType::Echo:
    case PacketType::ArpRequest:
    case PacketType::ArpReply:
      return Plane::Data;
    default:
      return Plane::Control;
  }
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::FlowStart:
      return "FlowStart";
    case EventKind::HostSend:
      return "HostSend";
    case EventKind::PacketArrive:
      return "PacketArrive";
    case EventKind::PacketDepart:
      return "PacketDepart";
    case EventKind::Drop:
      return "Drop";
    case EventKind::ControllerDone:
      return "ControllerDone";
    case EventKind::RuleInstall:
      return "RuleInstall";
    case EventKind::RuleExpire:
      return "RuleExpire";
    case EventKind::BufferTimeout:
      return "BufferTimeout";
    case EventKind::EchoTimeout:
      return "EchoTimeout";
    case EventKind::ProbeSend:
      return "ProbeSend";
    case EventKind::ProbeReply:
      return "ProbeReply";
    case EventKind::ProbeTimeout:
      return "ProbeTimeout";
    case EventKind::Alert:
      return "Alert";
    case EventKind::Mitigation:
      return "Mitigation";
    case EventKind::BurstStart:
      return "BurstStart";
    case EventKind::BurstEnd:
      return "BurstEnd";
  }
  return "?";
}

std::vector<RttSample> Trace::rtts_of(FlowId f) const {
  std::vector<RttSample> out;
  for (const auto& s : rtts)
    if (s.flow == f) out.push_back(s);
  std::sort(out.begin(), out.end(), [](const RttSample& a, const RttSample& b) { return a.index < b.index; });
  return out;
}

double Trace::utilization_of(NodeId from, NodeId to, std::size_t bucket) const {
  for (const auto& u : utilization)
    if (u.from == from && u.to == to)
      return bucket < u.busy_us.size() ? static_cast<double>(u.busy_us[bucket]) / bucket_us : 0.0;
  return 0.0;
}

namespace {

std::string ms(SimTime us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", static_cast<long long>(us / 1000),
                static_cast<long long>(us % 1000));
  return buf;
}

std::string node_str(NodeId n) { return n == kNoNode ? "null" : std::to_string(n); }

}  // namespace

void write_jsonl(std::ostream& os, const Trace& tr, const TraceHeader& h) {
  nlohmann::json head = {{"record", "header"},
                         {"scenario", h.scenario},
                         {"seed", h.seed},
                         {"config_hash", h.config_hash},
                         {"horizon_ms", us_to_ms(tr.horizon)}};
  os << head.dump() << '\n';
  char buf[512];
  for (const TraceEvent& e : tr.events) {
    const auto kind = to_string(e.kind);
    const auto type = to_string(e.type);
    std::snprintf(buf, sizeof buf,
                  "{\"t_ms\":%s,\"seq\":%llu,\"ev\":\"%.*s\",\"pkt\":%llu,\"type\":\"%.*s\","
                  "\"flow\":%u,\"idx\":%u,\"node\":%s,\"peer\":%s,\"aux\":%lld,\"note\":\"%s\"}\n",
                  ms(e.t).c_str(), static_cast<unsigned long long>(e.seq),
                  static_cast<int>(kind.size()), kind.data(), static_cast<unsigned long long>(e.packet),
                  static_cast<int>(type.size()), type.data(), e.flow, e.index, node_str(e.node).c_str(),
                  node_str(e.peer).c_str(), static_cast<long long>(e.aux), e.note);
    os << buf;
  }
  const auto& c = tr.controller;
  const auto& k = tr.conservation;
  nlohmann::json sum = {
      {"record", "summary"},
      {"controller",
       {{"packet_ins", c.packet_ins},
        {"path_requests", c.path_requests},
        {"unique_requests", c.unique_requests},
        {"common_requests", c.common_requests},
        {"arp_requests", c.arp_requests},
        {"flow_mods", c.flow_mods},
        {"packet_outs", c.packet_outs},
        {"rule_entries", c.rule_entries},
        {"probes_sent", c.probes_sent},
        {"probe_replies", c.probe_replies},
        {"messages", c.messages()}}},
      {"conservation",
       {{"injected", k.injected},
        {"delivered", k.delivered},
        {"dropped", k.dropped},
        {"in_flight", k.in_flight()},
        {"balanced", k.balanced()}}},
      {"drops",
       {{"queue_overflow", tr.drops.queue_overflow},
        {"buffer_timeout", tr.drops.buffer_timeout},
        {"unresponsive", tr.drops.unresponsive},
        {"probe_losses", tr.drops.probe_losses}}},
      {"alerts", nlohmann::json::array()},
      {"peak_rule_entries", tr.peak_rule_entries},
      {"rtt_samples", tr.rtts.size()},
  };
  for (const Alert& a : tr.alerts)
    sum["alerts"].push_back({{"switch", a.sw},
                             {"declared_at_ms", us_to_ms(a.declared_at)},
                             {"probes_sent", a.probes_sent},
                             {"cycle", a.cycle}});
  sum["mitigation_at_ms"] = tr.mitigation_at ? nlohmann::json(us_to_ms(*tr.mitigation_at)) : nlohmann::json();
  os << sum.dump() << '\n';
}

namespace {
void provenance(std::ostream& os, const TraceHeader& h) {
  os << "# scenario=" << h.scenario << " seed=" << h.seed << " config_hash=" << h.config_hash << '\n';
}
}  // namespace

void write_rtt_csv(std::ostream& os, const Trace& tr, const TraceHeader& h) {
  provenance(os, h);
  os << "flow,tag,index,rtt_ms,timed_out\n";
  for (const auto& s : tr.rtts) {
    os << s.flow << ',' << tr.flows.at(s.flow).tag << ',' << s.index << ','
       << (s.timed_out ? std::string("") : ms(s.rtt_us)) << ',' << (s.timed_out ? 1 : 0) << '\n';
  }
}

void write_utilization_csv(std::ostream& os, const Trace& tr, const TraceHeader& h) {
  provenance(os, h);
  os << "from,to,bucket_start_ms,busy_fraction\n";
  char buf[32];
  for (const auto& u : tr.utilization) {
    for (std::size_t b = 0; b < u.busy_us.size(); ++b) {
      if (u.busy_us[b] == 0) continue;
      std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(u.busy_us[b]) / tr.bucket_us);
      os << u.from << ',' << u.to << ',' << ms(static_cast<SimTime>(b) * tr.bucket_us) << ',' << buf << '\n';
    }
  }
}

}  // namespace mirage
