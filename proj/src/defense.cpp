#include "mirage/defense.hpp"

namespace mirage {

std::string_view to_string(DefenseMode m) {
  switch (m) {
    case DefenseMode::Off:
      return "off";
    case DefenseMode::DetectOnly:
      return "detect-only";
    case DefenseMode::Full:
      return "full";
  }
  return "?";
}

std::string_view to_string(MitigationPolicy p) {
  return p == MitigationPolicy::AlwaysOn ? "always_on" : "on_alert";
}

std::string_view to_string(RuleKind k) {
  switch (k) {
    case RuleKind::UniquePerPacketRule:
      return "UniquePerPacketRule";
    case RuleKind::RequestCommonRule:
      return "RequestCommonRule";
    case RuleKind::UseExistingCommonRule:
      return "UseExistingCommonRule";
  }
  return "?";
}

void ProbeConfig::validate() const {
  if (!(probe_interval_s > 0)) throw ConfigError("defense.probe_interval_s", "must be > 0");
  if (max_probe_attempts < 1) throw ConfigError("defense.max_probe_attempts", "must be >= 1");
}

void DefenseConfig::validate() const {
  probe.validate();
  if (lambda < 0) throw ConfigError("defense.lambda", "must be >= 0");
  if (batch_size < 0) throw ConfigError("defense.batch_size", "must be >= 0");
  if (max_cycles < 0) throw ConfigError("defense.max_cycles", "must be >= 0");
}

ProbeRound::Step ProbeRound::start(SimTime now) {
  t0_ = now;
  probes_ = 1;
  iteration_ = 1;
  return evaluate(now, true);
}

ProbeRound::Step ProbeRound::step(SimTime now) {
  ++probes_;
  ++iteration_;
  return evaluate(now, true);
}

ProbeRound::Step ProbeRound::evaluate(SimTime now, bool just_sent) {
  Step s;
  s.send_probe = just_sent;
  if (iteration_ <= cfg_.max_probe_attempts) {
    if (responded_) {
      s.finished = finished_ = true;
      return s;
    }
    s.wake_at = now + cfg_.interval_us();
    return s;
  }
  s.finished = finished_ = true;
  s.alert = !responded_;
  return s;
}

void ProbeRound::on_response(SimTime now) {
  if (finished_) return;
  if (!first_response_) first_response_ = now;
  responded_ = true;
}

PathPool& PathPools::get(NodeId src, NodeId dst) {
  auto key = std::make_pair(src, dst);
  auto it = pools_.find(key);
  if (it == pools_.end())
    it = pools_.emplace(key, make_path_pool(topo_, src, dst, metric_, caps_)).first;
  return it->second;
}

RoutePair asymmetric_route(PathPools& pools, NodeId src, NodeId dst) {
  RoutePair r;
  PathPool& fwd = pools.get(src, dst);
  r.forward = fwd.select_next();
  PathPool& rev = pools.get(dst, src);
  if (rev.diverse()) {
    r.reverse = rev.select_next_excluding(r.forward.reversed());
    r.no_diversity = false;
  } else {
    r.reverse = rev.select_next();
    r.no_diversity = true;
  }
  return r;
}

MirageController::MirageController(const Topology& topo, DefenseConfig cfg, Metric m, PoolCaps caps)
    : topo_(topo), cfg_(cfg), pools_(topo, m, caps) {
  cfg_.validate();
  if (cfg_.mitigation_enabled() && cfg_.policy == MitigationPolicy::AlwaysOn) activate_mitigation(0);
}

void MirageController::activate_mitigation(SimTime now) {
  if (!cfg_.mitigation_enabled() || active_) return;
  active_ = true;
  activated_at_ = now;
}

void MirageController::on_alert(const Alert& a) {
  if (cfg_.policy == MitigationPolicy::OnAlert) activate_mitigation(a.declared_at);
}

RuleDecision MirageController::on_new_flow_packet(std::uint32_t index, NodeId ingress, NodeId egress,
                                                  bool has_common_rule, const Path& default_path) {
  RuleDecision d;
  d.packet_index = index;
  if (!active_) {
    d.decision = has_common_rule ? RuleKind::UseExistingCommonRule : RuleKind::RequestCommonRule;
    d.path = default_path;
    d.reverse = default_path.reversed();
    d.no_diversity = true;
    return d;
  }
  if (index <= static_cast<std::uint32_t>(cfg_.lambda)) {
    d.decision = RuleKind::UniquePerPacketRule;
  } else if (has_common_rule) {
    d.decision = RuleKind::UseExistingCommonRule;
    d.path = default_path;
    d.reverse = default_path.reversed();
    return d;
  } else {
    d.decision = RuleKind::RequestCommonRule;
  }
  if (ingress == egress) {
    d.path = Path{{ingress}, 0.0};
    d.reverse = d.path;
    d.no_diversity = true;
    return d;
  }
  RoutePair r = asymmetric_route(pools_, ingress, egress);
  d.path = std::move(r.forward);
  d.reverse = std::move(r.reverse);
  d.no_diversity = r.no_diversity;
  return d;
}

RoutePair MirageController::control_route(NodeId sw, const Path& default_forward) {
  const auto ctrl = topo_.controller();
  if (!active_ || !ctrl) return {default_forward, default_forward.reversed(), true};
  return asymmetric_route(pools_, sw, *ctrl);
}

}  // namespace mirage
