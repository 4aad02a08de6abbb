#include "mirage/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>

namespace mirage {
namespace {

enum class PState : std::uint8_t { Created, OnLink, Buffered, AtController, Delivered, Dropped };

struct Packet {
  PacketId id = 0;
  PacketType type = PacketType::Data;
  FlowId flow = 0;
  std::uint32_t index = 0;
  Direction dir = Direction::Forward;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  int size = 1;
  SimTime created_at = 0;
  // Control packets are source routed; hop is the position of the node
  // currently holding the packet.
  std::vector<NodeId> route;
  std::size_t hop = 0;
  std::vector<NodeId> reply_route;
  NodeId origin = kNoNode;
  std::uint64_t ref = 0;
  bool arp = false;
};

enum class Ev : std::uint8_t {
  HostSend,
  Arrive,
  ControllerDone,
  RuleExpire,
  BufferTimeout,
  EchoTimeout,
  ProbeCycle,
  ProbeWake,
  Marker,
};

struct Event {
  SimTime t;
  std::uint64_t seq;
  Ev kind;
  std::uint64_t a;
  std::uint64_t b;
  std::uint64_t c;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return x.t != y.t ? x.t > y.t : x.seq > y.seq;
  }
};

struct BufKey {
  NodeId sw;
  FlowId flow;
  Direction dir;
  friend auto operator<=>(const BufKey&, const BufKey&) = default;
};

struct Buffered {
  PacketId pkt;
  SimTime since;
};

struct Outstanding {
  PacketId packet_in;
  SimTime at;
};

struct FlowRuntime {
  std::vector<SimTime> sent_at;   // by index-1
  std::vector<bool> resolved;     // echo or timeout seen
};

}  // namespace

struct Simulator::Impl {
  Impl(const Topology& t, SimConfig c)
      : topo(t), cfg(c), routes(t, c.metric), mirage(t, c.defense, c.metric, c.pool_caps),
        tables(t.node_count()) {
    t.validate();
    if (!t.controller()) throw ValidationError("simulation requires a placed controller");
    if (!t.switches_connected()) throw ValidationError("simulation requires a connected topology");
    ctrl = *t.controller();
    for (const Link& l : t.links()) {
      const SimTime svc = service_time_us(l.capacity);
      const SimTime lat = ms_to_us(l.latency_ms);
      queues.emplace_back(svc, lat, l.queue_limit);  // a -> b
      queues.emplace_back(svc, lat, l.queue_limit);  // b -> a
    }
  }

  const Topology& topo;
  SimConfig cfg;
  DefaultRoutes routes;
  MirageController mirage;
  NodeId ctrl = kNoNode;
  std::vector<LinkQueue> queues;
  std::vector<FlowTable> tables;
  std::vector<FlowSpec> flows;
  std::vector<FlowRuntime> runtime;
  std::set<NodeId> unresponsive;
  std::vector<std::pair<SimTime, std::pair<EventKind, FlowId>>> markers;

  std::deque<Packet> packets;  // stable references across pushes
  std::vector<PState> state;
  std::priority_queue<Event, std::vector<Event>, Later> q;
  std::uint64_t seq = 0;
  std::uint64_t log_seq = 0;
  SimTime now = 0;
  SimTime horizon = 0;
  bool ran = false;
  Trace tr;

  std::map<BufKey, std::deque<Buffered>> buffers;
  std::map<BufKey, Outstanding> outstanding;
  SimTime ctrl_busy_until = 0;
  std::vector<RuleDecision> decisions;

  // detection
  std::vector<NodeId> probe_order;
  std::vector<ProbeRound> rounds;
  std::vector<int> round_cycle;
  int cycle = 0;
  std::size_t batch_begin = 0, batch_end = 0, open_rounds = 0;

  // ---- plumbing -------------------------------------------------------

  void schedule(SimTime t, Ev kind, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
    if (t < now) throw std::logic_error("event scheduled in the past");
    q.push({t, seq++, kind, a, b, c});
  }

  void log(EventKind k, const Packet* p, NodeId node, NodeId peer = kNoNode, SimTime aux = 0,
           const char* note = "") {
    if (!cfg.record_events) return;
    TraceEvent e;
    e.t = now;
    e.seq = log_seq++;
    e.kind = k;
    if (p) {
      e.packet = p->id;
      e.type = p->type;
      e.flow = p->flow;
      e.index = p->index;
    }
    e.node = node;
    e.peer = peer;
    e.aux = aux;
    e.note = note;
    tr.events.push_back(e);
  }

  Packet& new_packet(PacketType type, NodeId src, NodeId dst, FlowId flow, std::uint32_t index,
                     Direction dir) {
    Packet p;
    p.id = packets.size();
    p.type = type;
    p.src = src;
    p.dst = dst;
    p.flow = flow;
    p.index = index;
    p.dir = dir;
    p.created_at = now;
    packets.push_back(std::move(p));
    state.push_back(PState::Created);
    ++tr.conservation.injected;
    if (plane_of(type) == Plane::Control && topo.node(src).kind == NodeKind::Host)
      ++tr.control_packets_from_hosts;
    return packets.back();
  }

  bool live(PacketId id) const {
    return state[id] != PState::Delivered && state[id] != PState::Dropped;
  }

  void deliver(Packet& p) {
    if (!live(p.id)) throw std::logic_error("packet delivered twice");
    state[p.id] = PState::Delivered;
    ++tr.conservation.delivered;
  }

  void drop(Packet& p, NodeId at, const char* reason) {
    if (!live(p.id)) throw std::logic_error("packet dropped twice");
    state[p.id] = PState::Dropped;
    ++tr.conservation.dropped;
    if (p.type == PacketType::ProbeRequest || p.type == PacketType::ProbeReply)
      ++tr.drops.probe_losses;
    log(EventKind::Drop, &p, at, kNoNode, 0, reason);
  }

  std::size_t dir_index(NodeId from, NodeId to) const {
    auto lid = topo.find_link(from, to);
    if (!lid) throw std::logic_error("transmit over a missing link");
    return 2 * *lid + (topo.link(*lid).a == from ? 0 : 1);
  }

  void transmit(Packet& p, NodeId from, NodeId to) {
    const std::size_t di = dir_index(from, to);
    const auto o = queues[di].transmit(now, p.size);
    if (o.dropped) {
      ++tr.drops.queue_overflow;
      if (plane_of(p.type) == Plane::Control) ++tr.drops.control_queue_overflow;
      drop(p, from, "queue_overflow");
      return;
    }
    state[p.id] = PState::OnLink;
    account_busy(di, o.start, o.depart);
    log(EventKind::PacketDepart, &p, from, to, o.delivery);
    schedule(o.delivery, Ev::Arrive, p.id, to);
  }

  void account_busy(std::size_t di, SimTime start, SimTime end) {
    auto& series = tr.utilization[di].busy_us;
    const SimTime b = cfg.utilization_bucket_us;
    end = std::min(end, horizon);
    while (start < end) {
      const std::size_t k = static_cast<std::size_t>(start / b);
      const SimTime stop = std::min(end, static_cast<SimTime>(k + 1) * b);
      if (k < series.size()) series[k] += stop - start;
      start = stop;
    }
  }

  NodeId host_switch(NodeId host) const { return topo.attachment_switch(host); }

  // ---- hosts ----------------------------------------------------------

  SimTime cbr_send_time(const FlowSpec& f, std::uint32_t k) const {
    if (k <= 1) return f.start;
    const double interval = 1000.0 / f.rate_pkt_per_ms;
    const SimTime first = f.first_gap_us >= 0 ? f.first_gap_us : std::llround(interval);
    return f.start + first + static_cast<SimTime>(std::floor((k - 2) * interval));
  }

  void host_send(FlowId fid, std::uint32_t k) {
    const FlowSpec& f = flows[fid];
    auto& st = tr.flows[fid];
    ++st.sent;
    if (mirage.mitigation_active() && k <= static_cast<std::uint32_t>(cfg.defense.lambda) &&
        f.kind != FlowKind::Arp)
      ++st.per_packet_phase;
    const PacketType type = f.kind == FlowKind::Arp ? PacketType::ArpRequest : PacketType::Data;
    const NodeId sw = host_switch(f.src);
    Packet& p = new_packet(type, f.src, f.kind == FlowKind::Arp ? sw : f.dst, fid, k,
                           Direction::Forward);
    if (k == 1) log(EventKind::FlowStart, &p, f.src);
    log(EventKind::HostSend, &p, f.src);
    if (f.kind == FlowKind::Cbr) {
      if (k < f.packets) schedule(cbr_send_time(f, k + 1), Ev::HostSend, fid, k + 1);
    } else {
      runtime[fid].sent_at[k - 1] = now;
      schedule(now + cfg.echo_timeout_us, Ev::EchoTimeout, fid, k);
    }
    transmit(p, f.src, sw);
  }

  void reply_seen(FlowId fid, std::uint32_t k, bool timed_out) {
    auto& rt = runtime[fid];
    if (rt.resolved[k - 1]) return;
    rt.resolved[k - 1] = true;
    RttSample s;
    s.flow = fid;
    s.index = k;
    s.timed_out = timed_out;
    s.rtt_us = timed_out ? -1 : now - rt.sent_at[k - 1];
    tr.rtts.push_back(s);
    if (timed_out)
      ++tr.flows[fid].timeouts;
    else
      ++tr.flows[fid].echoes;
    const FlowSpec& f = flows[fid];
    if (k < f.packets) schedule(now + f.gap_us, Ev::HostSend, fid, k + 1);
  }

  void at_host(Packet& p, NodeId host) {
    if (host != p.dst) {
      drop(p, host, "misdelivered");
      return;
    }
    deliver(p);
    log(EventKind::PacketArrive, &p, host);
    const FlowSpec& f = flows[p.flow];
    switch (p.type) {
      case PacketType::Data: {
        ++tr.flows[p.flow].delivered;
        if (f.kind == FlowKind::Ping) {
          Packet& e = new_packet(PacketType::Echo, host, f.src, p.flow, p.index, Direction::Reverse);
          transmit(e, host, host_switch(host));
        }
        break;
      }
      case PacketType::Echo:
      case PacketType::ArpReply:
        reply_seen(p.flow, p.index, false);
        break;
      default:
        break;
    }
  }

  // ---- switches -------------------------------------------------------

  NodeId egress_switch(FlowId fid, Direction dir) const {
    const FlowSpec& f = flows[fid];
    return host_switch(dir == Direction::Forward ? f.dst : f.src);
  }

  void send_control(Packet& p) {
    p.hop = 0;
    transmit(p, p.route[0], p.route[1]);
  }

  void raise_packet_in(NodeId sw, const Packet& trigger, bool arp) {
    const Path def = routes.route(sw, ctrl);
    RoutePair rp = mirage.control_route(sw, def);
    Packet& pin = new_packet(PacketType::PacketIn, sw, ctrl, trigger.flow, trigger.index, trigger.dir);
    pin.route = rp.forward.nodes;
    pin.reply_route = rp.reverse.nodes;
    pin.origin = sw;
    pin.ref = trigger.id;
    pin.arp = arp;
    if (!arp) outstanding[{sw, trigger.flow, trigger.dir}] = {pin.id, now};
    ControlLeg leg;
    leg.t = now;
    leg.flow = trigger.flow;
    leg.index = trigger.index;
    leg.forward = rp.forward.nodes;
    leg.reverse = rp.reverse.nodes;
    tr.control_legs.push_back(std::move(leg));
    send_control(pin);
  }

  void forward_data(Packet& p, NodeId sw, const FlowTableEntry& e) { transmit(p, sw, e.next_hop); }

  void at_switch_data(Packet& p, NodeId sw) {
    log(EventKind::PacketArrive, &p, sw);
    if (p.type == PacketType::ArpRequest) {
      deliver(p);
      if (unresponsive.count(sw)) return;
      raise_packet_in(sw, p, true);
      return;
    }
    if (auto e = tables[sw].lookup(p.flow, p.dir, p.index, now)) {
      forward_data(p, sw, *e);
      return;
    }
    if (unresponsive.count(sw)) {
      ++tr.drops.unresponsive;
      drop(p, sw, "table_miss_at_unresponsive_switch");
      return;
    }
    const BufKey key{sw, p.flow, p.dir};
    buffers[key].push_back({p.id, now});
    state[p.id] = PState::Buffered;
    schedule(now + cfg.buffer_timeout_us, Ev::BufferTimeout, p.id, sw);
    auto it = outstanding.find(key);
    if (it != outstanding.end() && it->second.at + cfg.buffer_timeout_us > now) return;
    raise_packet_in(sw, p, false);
  }

  void at_switch_control(Packet& p, NodeId sw) {
    if (sw != p.dst) {
      log(EventKind::PacketArrive, &p, sw);
      transmit(p, sw, p.route[p.hop + 1]);
      return;
    }
    if (unresponsive.count(sw)) {
      ++tr.drops.unresponsive;
      drop(p, sw, "unresponsive_switch");
      return;
    }
    deliver(p);
    log(EventKind::PacketArrive, &p, sw);
    switch (p.type) {
      case PacketType::FlowMod:
        install_decision(sw, p);
        break;
      case PacketType::PacketOut: {
        const FlowSpec& f = flows[p.flow];
        Packet& r = new_packet(PacketType::ArpReply, sw, f.src, p.flow, p.index, Direction::Reverse);
        transmit(r, sw, f.src);
        break;
      }
      case PacketType::ProbeRequest: {
        Packet& r = new_packet(PacketType::ProbeReply, sw, ctrl, 0, 0, Direction::Forward);
        r.route = routes.route(sw, ctrl).nodes;
        r.ref = p.ref;
        send_control(r);
        break;
      }
      default:
        break;
    }
  }

  void install_entries(const std::vector<NodeId>& path, FlowId fid, Direction dir,
                       std::uint32_t index, NodeId last_hop) {
    const bool per_packet = index != 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      FlowTableEntry e;
      e.sw = path[i];
      e.match = {fid, dir, index};
      e.next_hop = i + 1 < path.size() ? path[i + 1] : last_hop;
      e.installed_at = now;
      e.hard_timeout = per_packet ? cfg.per_packet_hard_timeout_us : cfg.common_hard_timeout_us;
      e.idle_timeout = per_packet ? 0 : cfg.common_idle_timeout_us;
      const std::uint64_t gen = tables[e.sw].install(e);
      ++tr.controller.rule_entries;
      const FlowTableEntry* stored = tables[e.sw].find(e.match);
      if (auto d = stored->deadline()) schedule(*d, Ev::RuleExpire, e.sw, gen, 0);
    }
  }

  std::size_t total_entries() const {
    std::size_t n = 0;
    for (const auto& t : tables) n += t.size();
    return n;
  }

  void record_rule_count() {
    const std::size_t n = total_entries();
    tr.peak_rule_entries = std::max(tr.peak_rule_entries, n);
    tr.rule_counts.push_back({now, n});
  }

  void install_decision(NodeId sw, const Packet& fm) {
    const RuleDecision& d = decisions[fm.ref];
    const FlowSpec& f = flows[fm.flow];
    if (d.decision != RuleKind::UseExistingCommonRule) {
      const std::uint32_t idx = d.decision == RuleKind::UniquePerPacketRule ? d.packet_index : 0;
      const NodeId fwd_host = fm.dir == Direction::Forward ? f.dst : f.src;
      install_entries(d.path.nodes, fm.flow, fm.dir, idx, fwd_host);
      if (fm.dir == Direction::Forward && f.kind == FlowKind::Ping)
        install_entries(d.reverse.nodes, fm.flow, Direction::Reverse, idx, f.src);
      log(EventKind::RuleInstall, &fm, sw, kNoNode, static_cast<SimTime>(total_entries()));
      record_rule_count();
    }
    release(sw, fm.flow, fm.dir);
  }

  void release(NodeId sw, FlowId flow, Direction dir) {
    const BufKey key{sw, flow, dir};
    outstanding.erase(key);
    auto it = buffers.find(key);
    if (it == buffers.end()) return;
    auto& dq = it->second;
    while (!dq.empty()) {
      Packet& p = packets[dq.front().pkt];
      auto e = tables[sw].lookup(p.flow, p.dir, p.index, now);
      if (!e) {
        raise_packet_in(sw, p, false);
        return;
      }
      tr.processing.push_back({p.flow, p.index, sw, now - dq.front().since});
      dq.pop_front();
      forward_data(p, sw, *e);
    }
    buffers.erase(it);
  }

  void on_buffer_timeout(PacketId pid, NodeId sw) {
    if (state[pid] != PState::Buffered) return;
    Packet& p = packets[pid];
    const BufKey key{sw, p.flow, p.dir};
    auto it = buffers.find(key);
    if (it == buffers.end()) return;
    auto& dq = it->second;
    auto pos = std::find_if(dq.begin(), dq.end(), [&](const Buffered& b) { return b.pkt == pid; });
    if (pos == dq.end()) return;
    dq.erase(pos);
    ++tr.drops.buffer_timeout;
    drop(p, sw, "buffer_timeout");
    auto out = outstanding.find(key);
    const bool stale = out != outstanding.end() && out->second.at + cfg.buffer_timeout_us <= now;
    if (stale) outstanding.erase(out);
    if (dq.empty()) {
      buffers.erase(it);
    } else if (stale) {
      raise_packet_in(sw, packets[dq.front().pkt], false);
    }
  }

  void on_rule_expire(NodeId sw, std::uint64_t gen) {
    for (const FlowTableEntry& e : tables[sw].entries()) {
      if (e.generation != gen) continue;
      if (e.expired(now)) {
        tables[sw].remove(e.match);
        log(EventKind::RuleExpire, nullptr, sw, kNoNode, static_cast<SimTime>(total_entries()));
        record_rule_count();
      } else if (auto d = e.deadline()) {
        schedule(*d, Ev::RuleExpire, sw, gen);
      }
      return;
    }
  }

  // ---- controller -----------------------------------------------------

  void at_controller(Packet& p) {
    if (p.type == PacketType::PacketIn) {
      state[p.id] = PState::AtController;
      log(EventKind::PacketArrive, &p, ctrl);
      const SimTime start = std::max(now, ctrl_busy_until);
      ctrl_busy_until = start + cfg.controller_processing_us;
      schedule(ctrl_busy_until, Ev::ControllerDone, p.id);
      return;
    }
    deliver(p);
    log(EventKind::PacketArrive, &p, ctrl);
    if (p.type == PacketType::ProbeReply) {
      ++tr.controller.probe_replies;
      log(EventKind::ProbeReply, &p, ctrl, p.src);
      rounds[p.ref].on_response(now);
    }
  }

  void controller_done(PacketId pid) {
    Packet& pin = packets[pid];
    deliver(pin);
    ++tr.controller.packet_ins;
    const NodeId sw = pin.origin;
    if (pin.arp) {
      ++tr.controller.arp_requests;
      Packet& out = new_packet(PacketType::PacketOut, ctrl, sw, pin.flow, pin.index, pin.dir);
      out.route = pin.reply_route;
      ++tr.controller.packet_outs;
      log(EventKind::ControllerDone, &pin, ctrl, sw);
      send_control(out);
      return;
    }
    ++tr.controller.path_requests;
    auto& fs = tr.flows[pin.flow];
    ++fs.path_requests;
    const NodeId egress = egress_switch(pin.flow, pin.dir);
    const bool has_common = tables[sw].has_common(pin.flow, pin.dir, now);
    RuleDecision d = mirage.on_new_flow_packet(pin.index, sw, egress, has_common,
                                               routes.route(sw, egress));
    switch (d.decision) {
      case RuleKind::UniquePerPacketRule:
        ++tr.controller.unique_requests;
        ++fs.unique_requests;
        break;
      case RuleKind::RequestCommonRule:
        ++tr.controller.common_requests;
        ++fs.common_requests;
        break;
      case RuleKind::UseExistingCommonRule:
        ++tr.controller.existing_common;
        break;
    }
    DecisionRecord rec;
    rec.t = now;
    rec.flow = pin.flow;
    rec.index = pin.index;
    rec.dir = pin.dir;
    rec.sw = sw;
    rec.kind = d.decision;
    rec.path = d.path.nodes;
    rec.reverse = d.reverse.nodes;
    rec.no_diversity = d.no_diversity;
    tr.decisions.push_back(std::move(rec));
    decisions.push_back(std::move(d));

    Packet& fm = new_packet(PacketType::FlowMod, ctrl, sw, pin.flow, pin.index, pin.dir);
    fm.route = pin.reply_route;
    fm.ref = decisions.size() - 1;
    ++tr.controller.flow_mods;
    log(EventKind::ControllerDone, &pin, ctrl, sw);
    send_control(fm);
  }

  // ---- detection ------------------------------------------------------

  void start_cycle() {
    ++cycle;
    batch_begin = 0;
    start_batch();
  }

  void start_batch() {
    const std::size_t n = probe_order.size();
    const std::size_t b = cfg.defense.batch_size > 0 ? static_cast<std::size_t>(cfg.defense.batch_size) : n;
    batch_end = std::min(n, batch_begin + b);
    open_rounds = batch_end - batch_begin;
    for (std::size_t i = batch_begin; i < batch_end; ++i) {
      rounds.emplace_back(probe_order[i], cfg.defense.probe);
      round_cycle.push_back(cycle);
      const std::size_t rid = rounds.size() - 1;
      apply_step(rid, rounds[rid].start(now));
    }
  }

  void send_probe(std::size_t rid) {
    const NodeId sw = rounds[rid].sw();
    Packet& p = new_packet(PacketType::ProbeRequest, ctrl, sw, 0, 0, Direction::Forward);
    p.route = routes.route(sw, ctrl).reversed().nodes;
    p.ref = rid;
    ++tr.controller.probes_sent;
    log(EventKind::ProbeSend, &p, ctrl, sw);
    send_control(p);
  }

  void apply_step(std::size_t rid, const ProbeRound::Step& s) {
    if (s.send_probe) send_probe(rid);
    if (!s.finished) {
      schedule(s.wake_at, Ev::ProbeWake, rid);
      return;
    }
    const ProbeRound& r = rounds[rid];
    ProbeRecord rec;
    rec.sw = r.sw();
    rec.cycle = round_cycle[rid];
    rec.started_at = r.started_at();
    rec.finished_at = now;
    rec.first_response_at = r.first_response_at();
    rec.probes_sent = r.probes_sent();
    rec.alert = s.alert;
    rec.truly_unresponsive = unresponsive.count(r.sw()) > 0;
    tr.probes.push_back(rec);
    if (s.alert) {
      Alert a{r.sw(), now, r.probes_sent(), round_cycle[rid]};
      tr.alerts.push_back(a);
      log(EventKind::Alert, nullptr, r.sw(), kNoNode, r.probes_sent());
      const bool was = mirage.mitigation_active();
      mirage.on_alert(a);
      if (!was && mirage.mitigation_active()) {
        tr.mitigation_at = now;
        log(EventKind::Mitigation, nullptr, ctrl);
      }
    }
    if (--open_rounds > 0) return;
    batch_begin = batch_end;
    if (batch_begin < probe_order.size()) {
      start_batch();
    } else if (cfg.defense.max_cycles == 0 || cycle < cfg.defense.max_cycles) {
      schedule(now + cfg.defense.cycle_gap, Ev::ProbeCycle);
    }
  }

  // ---- loop -----------------------------------------------------------

  void dispatch(const Event& e) {
    switch (e.kind) {
      case Ev::HostSend:
        host_send(static_cast<FlowId>(e.a), static_cast<std::uint32_t>(e.b));
        break;
      case Ev::Arrive: {
        Packet& p = packets[e.a];
        const NodeId node = static_cast<NodeId>(e.b);
        state[p.id] = PState::Created;
        if (plane_of(p.type) == Plane::Control) ++p.hop;
        if (node == ctrl) {
          at_controller(p);
        } else if (topo.is_switch(node)) {
          if (plane_of(p.type) == Plane::Control)
            at_switch_control(p, node);
          else
            at_switch_data(p, node);
        } else {
          at_host(p, node);
        }
        break;
      }
      case Ev::ControllerDone:
        controller_done(e.a);
        break;
      case Ev::RuleExpire:
        on_rule_expire(static_cast<NodeId>(e.a), e.b);
        break;
      case Ev::BufferTimeout:
        on_buffer_timeout(e.a, static_cast<NodeId>(e.b));
        break;
      case Ev::EchoTimeout:
        if (!runtime[e.a].resolved[e.b - 1]) {
          log(EventKind::Drop, nullptr, flows[e.a].src, kNoNode, 0, "echo_timeout");
          reply_seen(static_cast<FlowId>(e.a), static_cast<std::uint32_t>(e.b), true);
        }
        break;
      case Ev::ProbeCycle:
        start_cycle();
        break;
      case Ev::ProbeWake:
        apply_step(e.a, rounds[e.a].step(now));
        break;
      case Ev::Marker: {
        const auto& m = markers[e.a];
        log(m.second.first, nullptr, kNoNode);
        if (cfg.record_events) tr.events.back().flow = m.second.second;
        break;
      }
    }
  }

  Trace run(SimTime h) {
    if (ran) throw Error("Simulator::run called twice");
    ran = true;
    if (h <= 0) throw ValidationError("horizon must be > 0");
    horizon = h;
    tr.horizon = h;
    tr.bucket_us = cfg.utilization_bucket_us;
    const std::size_t buckets = static_cast<std::size_t>((h + cfg.utilization_bucket_us - 1) /
                                                         cfg.utilization_bucket_us);
    for (const Link& l : topo.links()) {
      tr.utilization.push_back({l.a, l.b, std::vector<SimTime>(buckets, 0)});
      tr.utilization.push_back({l.b, l.a, std::vector<SimTime>(buckets, 0)});
    }
    if (mirage.mitigation_active()) tr.mitigation_at = 0;
    for (FlowId f = 0; f < flows.size(); ++f) schedule(flows[f].start, Ev::HostSend, f, 1);
    for (std::size_t i = 0; i < markers.size(); ++i) schedule(markers[i].first, Ev::Marker, i);
    if (cfg.defense.detection_enabled()) {
      probe_order = topo.switches();
      if (!probe_order.empty()) schedule(cfg.defense.probe_start, Ev::ProbeCycle);
    }
    while (!q.empty() && q.top().t <= horizon) {
      Event e = q.top();
      q.pop();
      now = e.t;
      dispatch(e);
    }
    now = horizon;
    for (PState s : state) {
      switch (s) {
        case PState::OnLink:
          ++tr.conservation.on_links;
          break;
        case PState::Buffered:
          ++tr.conservation.buffered;
          break;
        case PState::AtController:
          ++tr.conservation.at_controller;
          break;
        case PState::Created:
          throw std::logic_error("packet left in transient state");
        default:
          break;
      }
    }
    return std::move(tr);
  }
};

Simulator::Simulator(const Topology& topo, SimConfig cfg)
    : impl_(std::make_unique<Impl>(topo, cfg)) {}

Simulator::~Simulator() = default;

FlowId Simulator::add_flow(const FlowSpec& f) {
  auto& I = *impl_;
  const Topology& t = I.topo;
  auto is_host = [&](NodeId n) { return n < t.node_count() && t.node(n).kind == NodeKind::Host; };
  if (!is_host(f.src)) throw ValidationError("flow source must be a host");
  if (f.kind != FlowKind::Arp && !is_host(f.dst)) throw ValidationError("flow destination must be a host");
  if (f.kind != FlowKind::Arp && f.src == f.dst) throw ValidationError("flow endpoints must differ");
  if (f.packets < 1) throw ValidationError("flow needs at least one packet");
  if (f.kind == FlowKind::Cbr && !(f.rate_pkt_per_ms > 0)) throw ValidationError("flow rate must be > 0");
  if (f.start < 0 || f.gap_us < 0) throw ValidationError("flow times must be >= 0");
  const FlowId id = static_cast<FlowId>(I.flows.size());
  I.flows.push_back(f);
  FlowRuntime rt;
  if (f.kind != FlowKind::Cbr) {
    rt.sent_at.assign(f.packets, 0);
    rt.resolved.assign(f.packets, false);
  }
  I.runtime.push_back(std::move(rt));
  FlowStats st;
  st.id = id;
  st.kind = f.kind;
  st.tag = f.tag;
  st.src = f.src;
  st.dst = f.kind == FlowKind::Arp ? kNoNode : f.dst;
  st.decoy = f.decoy;
  I.tr.flows.push_back(std::move(st));
  return id;
}

const FlowSpec& Simulator::flow(FlowId id) const { return impl_->flows.at(id); }
std::size_t Simulator::flow_count() const { return impl_->flows.size(); }

void Simulator::set_unresponsive(NodeId sw) {
  if (!impl_->topo.is_switch(sw)) throw ValidationError("only switches can be unresponsive");
  impl_->unresponsive.insert(sw);
}

void Simulator::add_marker(SimTime t, EventKind kind, FlowId flow) {
  impl_->markers.push_back({t, {kind, flow}});
}

const Topology& Simulator::topology() const { return impl_->topo; }
DefaultRoutes& Simulator::routes() { return impl_->routes; }
const SimConfig& Simulator::config() const { return impl_->cfg; }

Trace Simulator::run(SimTime horizon) { return impl_->run(horizon); }

}  // namespace mirage
