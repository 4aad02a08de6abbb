#include "mirage/scenario.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mirage {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Object reader that names the offending key path in every error.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items())
      if (!ok.count(k)) throw ConfigError(field(k), "unknown key");
  }

  double num(const std::string& k, double def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(field(k), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(k), "must be finite");
    return d;
  }
  double num_req(const std::string& k) const {
    if (!has(k)) throw ConfigError(field(k), "required");
    return num(k, 0);
  }
  long long integer(const std::string& k, long long def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(field(k), "must be an integer");
    return v.get<long long>();
  }
  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(field(k), "must be a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(field(k), "must be true or false");
    return v.get<bool>();
  }
  std::vector<std::string> strings(const std::string& k) const {
    std::vector<std::string> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(field(k), "must be an array of strings");
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(field(k), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  std::vector<std::pair<std::string, std::string>> pairs(const std::string& k) const {
    std::vector<std::pair<std::string, std::string>> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    auto bad = [&] { return ConfigError(field(k), "must be an array of [a, b] label pairs"); };
    if (!v.is_array()) throw bad();
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) throw bad();
      out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
  }
  std::optional<Obj> child(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return Obj(j_.at(k), field(k));
  }
  const json& raw(const std::string& k) const { return j_.at(k); }

 private:
  const json& j_;
  std::string path_;
};

SimTime ms_field(const Obj& o, const std::string& k, double def_ms, bool allow_zero = true) {
  const double v = o.num(k, def_ms);
  if (v < 0 || (!allow_zero && v == 0)) throw ConfigError(o.field(k), allow_zero ? "must be >= 0" : "must be > 0");
  return ms_to_us(v);
}

FlowKind flow_kind(const Obj& o, const std::string& k) {
  const std::string s = o.str(k, "ping");
  if (s == "ping") return FlowKind::Ping;
  if (s == "cbr") return FlowKind::Cbr;
  if (s == "arp") return FlowKind::Arp;
  throw ConfigError(o.field(k), "expected ping | cbr | arp");
}

}  // namespace

Scenario parse_scenario(const json& j, const std::string& base_dir) {
  Scenario sc;
  sc.base_dir = base_dir;
  sc.raw = j;
  const Obj root(j, "");
  root.allow({"name", "seed", "horizon_ms", "topology", "links", "controller", "hosts", "workload",
              "attacker", "defense", "detection", "sim", "output"});
  sc.name = root.str("name", "scenario");
  if (!root.has("seed")) throw ConfigError("seed", "required");
  const long long seed = root.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  sc.seed = static_cast<std::uint64_t>(seed);
  sc.horizon_ms = root.num_req("horizon_ms");
  if (!(sc.horizon_ms > 0)) throw ConfigError("horizon_ms", "must be > 0");

  if (auto l = root.child("links")) {
    l->allow({"capacity_pkt_per_ms", "latency_ms", "queue_limit", "access_capacity_factor"});
    sc.links.capacity = l->num("capacity_pkt_per_ms", sc.links.capacity);
    sc.links.latency_ms = l->num("latency_ms", sc.links.latency_ms);
    sc.links.queue_limit = static_cast<int>(l->integer("queue_limit", sc.links.queue_limit));
    sc.links.access_capacity_factor = l->num("access_capacity_factor", sc.links.access_capacity_factor);
    if (!(sc.links.capacity > 0)) throw ConfigError("links.capacity_pkt_per_ms", "must be > 0");
    if (sc.links.latency_ms < 0) throw ConfigError("links.latency_ms", "must be >= 0");
    if (sc.links.queue_limit < 1) throw ConfigError("links.queue_limit", "must be >= 1");
    if (!(sc.links.access_capacity_factor > 0)) throw ConfigError("links.access_capacity_factor", "must be > 0");
  }

  {
    auto t = root.child("topology");
    if (!t) throw ConfigError("topology", "required");
    t->allow({"builtin", "size", "extra_edges", "gml_path"});
    sc.topology.builtin = t->str("builtin", "");
    sc.topology.gml_path = t->str("gml_path", "");
    sc.topology.size = static_cast<int>(t->integer("size", 4));
    sc.topology.extra_edges = static_cast<int>(t->integer("extra_edges", 0));
    if (sc.topology.builtin.empty() == sc.topology.gml_path.empty())
      throw ConfigError("topology", "give exactly one of builtin or gml_path");
    if (!sc.topology.gml_path.empty()) {
      fs::path p(sc.topology.gml_path);
      if (p.is_relative()) p = fs::path(base_dir) / p;
      if (!fs::exists(p)) throw ConfigError("topology.gml_path", "file not found: " + p.string());
      sc.topology.gml_path = p.string();
    } else {
      static const std::set<std::string> known{"dumbbell", "ring", "star", "path", "complete", "random"};
      if (!known.count(sc.topology.builtin))
        throw ConfigError("topology.builtin", "expected dumbbell | ring | star | path | complete | random");
      if (sc.topology.size < 1) throw ConfigError("topology.size", "must be >= 1");
      if (sc.topology.extra_edges < 0) throw ConfigError("topology.extra_edges", "must be >= 0");
    }
  }

  if (auto c = root.child("controller")) {
    c->allow({"placement", "node"});
    sc.controller_placement = c->str("placement", sc.controller_placement);
    sc.controller_node = c->str("node", "");
    if (sc.controller_placement != "max_degree" && sc.controller_placement != "centroid" &&
        sc.controller_placement != "node")
      throw ConfigError("controller.placement", "expected max_degree | centroid | node");
    if (sc.controller_placement == "node" && sc.controller_node.empty())
      throw ConfigError("controller.node", "required when placement is node");
  }

  if (auto h = root.child("hosts")) {
    h->allow({"random", "pinned"});
    sc.random_hosts = static_cast<int>(h->integer("random", 0));
    if (sc.random_hosts < 0) throw ConfigError("hosts.random", "must be >= 0");
    if (h->has("pinned")) {
      const json& arr = h->raw("pinned");
      if (!arr.is_array()) throw ConfigError("hosts.pinned", "must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Obj p(arr[i], "hosts.pinned[" + std::to_string(i) + "]");
        p.allow({"label", "switch"});
        PinnedHost ph{p.str("label", ""), p.str("switch", "")};
        if (ph.label.empty()) throw ConfigError(p.field("label"), "required");
        if (ph.sw.empty()) throw ConfigError(p.field("switch"), "required");
        sc.pinned.push_back(ph);
      }
    }
  }

  if (auto w = root.child("workload")) {
    w->allow({"flows", "background"});
    if (w->has("flows")) {
      const json& arr = w->raw("flows");
      if (!arr.is_array()) throw ConfigError("workload.flows", "must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Obj f(arr[i], "workload.flows[" + std::to_string(i) + "]");
        f.allow({"kind", "src", "dst", "start_ms", "packets", "rate_pkt_per_ms", "gap_ms", "tag"});
        FlowConfig fc;
        fc.kind = flow_kind(f, "kind");
        fc.src = f.str("src", "");
        fc.dst = f.str("dst", "");
        if (fc.src.empty()) throw ConfigError(f.field("src"), "required");
        if (fc.kind != FlowKind::Arp && fc.dst.empty()) throw ConfigError(f.field("dst"), "required");
        fc.start_ms = f.num("start_ms", 0);
        if (fc.start_ms < 0) throw ConfigError(f.field("start_ms"), "must be >= 0");
        const long long n = f.integer("packets", 1);
        if (n < 1) throw ConfigError(f.field("packets"), "must be >= 1");
        fc.packets = static_cast<std::uint32_t>(n);
        fc.rate_pkt_per_ms = f.num("rate_pkt_per_ms", 1);
        if (!(fc.rate_pkt_per_ms > 0)) throw ConfigError(f.field("rate_pkt_per_ms"), "must be > 0");
        fc.gap_ms = f.num("gap_ms", 0);
        if (fc.gap_ms < 0) throw ConfigError(f.field("gap_ms"), "must be >= 0");
        fc.tag = f.str("tag", "flow" + std::to_string(i));
        sc.flows.push_back(fc);
      }
    }
    if (auto b = w->child("background")) {
      b->allow({"load", "flows", "pairs", "start_ms", "duration_ms"});
      sc.background.load = b->num("load", 0);
      if (sc.background.load < 0) throw ConfigError("workload.background.load", "must be >= 0");
      sc.background.flows = static_cast<int>(b->integer("flows", 0));
      if (sc.background.flows < 0) throw ConfigError("workload.background.flows", "must be >= 0");
      sc.background.pairs = b->pairs("pairs");
      sc.background.start_ms = b->num("start_ms", 0);
      sc.background.duration_ms = b->num("duration_ms", 0);
      if (sc.background.start_ms < 0) throw ConfigError("workload.background.start_ms", "must be >= 0");
      if (sc.background.duration_ms < 0) throw ConfigError("workload.background.duration_ms", "must be >= 0");
    }
  }

  if (auto a = root.child("attacker")) {
    a->allow({"recon", "flood"});
    if (auto r = a->child("recon")) {
      r->allow({"host", "peer", "candidates", "burst_rate_pkt_per_ms", "burst_duration_ms", "burst_offset_ms",
                "warmup_lead_ms", "trials", "threshold_ms", "start_ms", "slot_ms"});
      auto& rs = sc.recon;
      rs.enabled = true;
      rs.host = r->str("host", "");
      rs.peer = r->str("peer", "");
      if (rs.host.empty()) throw ConfigError("attacker.recon.host", "required");
      if (rs.peer.empty()) throw ConfigError("attacker.recon.peer", "required");
      rs.candidates = r->strings("candidates");
      auto& p = rs.params;
      p.burst_rate_pkt_per_ms = r->num("burst_rate_pkt_per_ms", p.burst_rate_pkt_per_ms);
      p.burst_duration_us = ms_field(*r, "burst_duration_ms", us_to_ms(p.burst_duration_us), false);
      p.burst_offset_us = ms_field(*r, "burst_offset_ms", us_to_ms(p.burst_offset_us));
      p.warmup_lead_us = ms_field(*r, "warmup_lead_ms", us_to_ms(p.warmup_lead_us));
      p.trials = static_cast<int>(r->integer("trials", p.trials));
      p.threshold_ms = r->num("threshold_ms", p.threshold_ms);
      p.start_us = ms_field(*r, "start_ms", 0);
      p.slot_us = ms_field(*r, "slot_ms", us_to_ms(p.slot_us), false);
      if (p.trials < 1) throw ConfigError("attacker.recon.trials", "must be >= 1");
      if (!(p.burst_rate_pkt_per_ms > 0)) throw ConfigError("attacker.recon.burst_rate_pkt_per_ms", "must be > 0");
      if (p.threshold_ms < 0) throw ConfigError("attacker.recon.threshold_ms", "must be >= 0");
    }
    if (auto f = a->child("flood")) {
      f->allow({"targets", "decoys", "rate_pkt_per_ms", "start_ms", "duration_ms"});
      auto& fs = sc.flood;
      fs.enabled = true;
      fs.targets = f->pairs("targets");
      fs.decoys = f->strings("decoys");
      fs.rate_pkt_per_ms = f->num("rate_pkt_per_ms", 0);
      fs.start_ms = f->num("start_ms", 0);
      fs.duration_ms = f->num("duration_ms", 0);
      if (fs.rate_pkt_per_ms < 0) throw ConfigError("attacker.flood.rate_pkt_per_ms", "must be >= 0");
      if (fs.start_ms < 0) throw ConfigError("attacker.flood.start_ms", "must be >= 0");
      if (fs.duration_ms < 0) throw ConfigError("attacker.flood.duration_ms", "must be >= 0");
      if (fs.rate_pkt_per_ms > 0 && fs.decoys.size() < 2)
        throw ConfigError("attacker.flood.decoys", "need at least two decoy hosts");
    }
  }

  auto& d = sc.sim.defense;
  if (auto o = root.child("defense")) {
    o->allow({"mode", "lambda", "probe_interval_s", "max_probe_attempts", "policy", "batch_size",
              "probe_start_ms", "cycle_gap_ms", "max_cycles"});
    const std::string mode = o->str("mode", "off");
    if (mode == "off") d.mode = DefenseMode::Off;
    else if (mode == "detect-only") d.mode = DefenseMode::DetectOnly;
    else if (mode == "full") d.mode = DefenseMode::Full;
    else throw ConfigError("defense.mode", "expected off | detect-only | full");
    d.lambda = static_cast<int>(o->integer("lambda", d.lambda));
    d.probe.probe_interval_s = o->num("probe_interval_s", d.probe.probe_interval_s);
    d.probe.max_probe_attempts = static_cast<int>(o->integer("max_probe_attempts", d.probe.max_probe_attempts));
    const std::string policy = o->str("policy", "always_on");
    if (policy == "always_on") d.policy = MitigationPolicy::AlwaysOn;
    else if (policy == "on_alert") d.policy = MitigationPolicy::OnAlert;
    else throw ConfigError("defense.policy", "expected always_on | on_alert");
    d.batch_size = static_cast<int>(o->integer("batch_size", 0));
    d.probe_start = ms_field(*o, "probe_start_ms", 0);
    d.cycle_gap = ms_field(*o, "cycle_gap_ms", 0);
    d.max_cycles = static_cast<int>(o->integer("max_cycles", 0));
  }
  d.validate();

  if (auto o = root.child("detection")) {
    o->allow({"unresponsive"});
    sc.unresponsive = o->strings("unresponsive");
  }

  if (auto s = root.child("sim")) {
    s->allow({"controller_processing_ms", "per_packet_hard_timeout_ms", "common_idle_timeout_ms",
              "common_hard_timeout_ms", "buffer_timeout_ms", "echo_timeout_ms", "utilization_bucket_ms",
              "record_events", "metric", "pool_extra_hops", "pool_max_paths"});
    auto& c = sc.sim;
    c.controller_processing_us = ms_field(*s, "controller_processing_ms", us_to_ms(c.controller_processing_us));
    c.per_packet_hard_timeout_us =
        ms_field(*s, "per_packet_hard_timeout_ms", us_to_ms(c.per_packet_hard_timeout_us), false);
    c.common_idle_timeout_us = ms_field(*s, "common_idle_timeout_ms", us_to_ms(c.common_idle_timeout_us));
    c.common_hard_timeout_us = ms_field(*s, "common_hard_timeout_ms", us_to_ms(c.common_hard_timeout_us));
    c.buffer_timeout_us = ms_field(*s, "buffer_timeout_ms", us_to_ms(c.buffer_timeout_us), false);
    c.echo_timeout_us = ms_field(*s, "echo_timeout_ms", us_to_ms(c.echo_timeout_us), false);
    c.utilization_bucket_us = ms_field(*s, "utilization_bucket_ms", us_to_ms(c.utilization_bucket_us), false);
    c.record_events = s->boolean("record_events", c.record_events);
    const std::string m = s->str("metric", "hop");
    if (m == "hop") c.metric = Metric::HopCount;
    else if (m == "latency") c.metric = Metric::LatencySum;
    else if (m == "inverse_capacity") c.metric = Metric::InverseCapacityMin;
    else throw ConfigError("sim.metric", "expected hop | latency | inverse_capacity");
    c.pool_caps.extra_hops = static_cast<int>(s->integer("pool_extra_hops", c.pool_caps.extra_hops));
    c.pool_caps.max_paths = static_cast<int>(s->integer("pool_max_paths", c.pool_caps.max_paths));
    if (c.pool_caps.extra_hops < 0) throw ConfigError("sim.pool_extra_hops", "must be >= 0");
    if (c.pool_caps.max_paths < 1) throw ConfigError("sim.pool_max_paths", "must be >= 1");
  }

  if (auto o = root.child("output")) {
    o->allow({"dir", "trace"});
    sc.output_dir = o->str("dir", sc.output_dir);
    sc.write_trace = o->boolean("trace", true);
  }

  sc.config_hash = sha256_hex(j.dump());
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", std::string("invalid JSON: ") + e.what());
  }
  const fs::path dir = fs::path(path).parent_path();
  return parse_scenario(j, dir.empty() ? "." : dir.string());
}

bool is_sweep_param(const std::string& p) {
  return p == "load" || p == "lambda" || p == "probeInterval" || p == "burst_rate";
}

json with_param(json j, const std::string& param, double value) {
  if (param == "load") {
    j["workload"]["background"]["load"] = value;
  } else if (param == "lambda") {
    if (value < 0 || value != std::floor(value)) throw ConfigError("lambda", "sweep values must be integers >= 0");
    j["defense"]["lambda"] = static_cast<long long>(value);
  } else if (param == "probeInterval") {
    j["defense"]["probe_interval_s"] = value;
  } else if (param == "burst_rate") {
    if (!j.contains("attacker") || !j["attacker"].contains("recon"))
      throw ConfigError("attacker.recon", "burst_rate sweep needs a recon section");
    j["attacker"]["recon"]["burst_rate_pkt_per_ms"] = value;
  } else {
    throw ConfigError(param, "unknown sweep parameter (load | lambda | probeInterval | burst_rate)");
  }
  return j;
}

json with_seed(json j, std::uint64_t seed) {
  j["seed"] = seed;
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace {

NodeId resolve(const Topology& t, const std::string& label, const std::string& field, std::optional<NodeKind> kind) {
  auto n = t.find_by_label(label);
  if (!n) throw ConfigError(field, "no node labelled '" + label + "'");
  if (kind && t.node(*n).kind != *kind)
    throw ConfigError(field, "'" + label + "' is a " + std::string(to_string(t.node(*n).kind)) + ", expected " +
                                 std::string(to_string(*kind)));
  return *n;
}

}  // namespace

Topology build_topology(const Scenario& sc) {
  Topology base;
  if (!sc.topology.gml_path.empty()) {
    try {
      base = load_gml_file(sc.topology.gml_path, sc.links).topology;
    } catch (const ParseError& e) {
      throw ConfigError("topology.gml_path", e.what());
    } catch (const ValidationError& e) {
      throw ConfigError("topology.gml_path", e.what());
    }
    if (base.node_count() == 0) throw ConfigError("topology.gml_path", "no switches");
    if (!base.switches_connected())
      throw ConfigError("topology.gml_path", "switch graph is disconnected; simulation needs a connected graph");
  } else {
    const int n = sc.topology.size;
    const std::string& b = sc.topology.builtin;
    if (b == "dumbbell") base = build::dumbbell(n, sc.links);
    else if (b == "ring") base = build::ring(n, sc.links);
    else if (b == "star") base = build::star(n, sc.links);
    else if (b == "path") base = build::path(n, sc.links);
    else if (b == "complete") base = build::complete(n, sc.links);
    else base = build::random_connected(n, sc.topology.extra_edges, sc.seed, sc.links);
    base.set_name(sc.name);
  }

  ControllerPlacement where = MaxDegree{};
  if (sc.controller_placement == "centroid") where = Centroid{};
  if (sc.controller_placement == "node")
    where = AtNode{resolve(base, sc.controller_node, "controller.node", NodeKind::Switch)};
  Topology t = place_controller(base, where, sc.links);
  t = attach_hosts(t, sc.random_hosts, sc.seed, sc.links);
  for (std::size_t i = 0; i < sc.pinned.size(); ++i) {
    const auto& p = sc.pinned[i];
    const std::string f = "hosts.pinned[" + std::to_string(i) + "]";
    if (t.find_by_label(p.label)) throw ConfigError(f + ".label", "label '" + p.label + "' already in use");
    attach_host(t, resolve(t, p.sw, f + ".switch", NodeKind::Switch), p.label, sc.links);
  }
  return t;
}

RunOutput run_scenario(const Scenario& sc) {
  RunOutput out;
  out.topo = build_topology(sc);
  const Topology& t = out.topo;
  Simulator sim(t, sc.sim);
  const SimTime horizon = ms_to_us(sc.horizon_ms);

  for (std::size_t i = 0; i < sc.flows.size(); ++i) {
    const auto& fc = sc.flows[i];
    const std::string f = "workload.flows[" + std::to_string(i) + "]";
    FlowSpec s;
    s.kind = fc.kind;
    s.src = resolve(t, fc.src, f + ".src", NodeKind::Host);
    if (fc.kind != FlowKind::Arp) s.dst = resolve(t, fc.dst, f + ".dst", NodeKind::Host);
    if (s.src == s.dst) throw ConfigError(f + ".dst", "must differ from src");
    s.start = ms_to_us(fc.start_ms);
    s.packets = fc.packets;
    s.rate_pkt_per_ms = fc.rate_pkt_per_ms;
    s.gap_us = ms_to_us(fc.gap_ms);
    s.tag = fc.tag;
    sim.add_flow(s);
  }

  const auto& bg = sc.background;
  if (bg.load > 0) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t i = 0; i < bg.pairs.size(); ++i) {
      const std::string f = "workload.background.pairs[" + std::to_string(i) + "]";
      pairs.emplace_back(resolve(t, bg.pairs[i].first, f, NodeKind::Host),
                         resolve(t, bg.pairs[i].second, f, NodeKind::Host));
      if (pairs.back().first == pairs.back().second) throw ConfigError(f, "endpoints must differ");
    }
    if (pairs.empty() && bg.flows > 0) {
      const auto hosts = t.hosts();
      if (hosts.size() < 2) throw ConfigError("workload.background.flows", "needs at least two hosts");
      Rng rng(sc.seed ^ 0x9e3779b97f4a7c15ULL);
      for (int i = 0; i < bg.flows; ++i) {
        const NodeId a = hosts[rng.uniform(hosts.size())];
        NodeId b = a;
        while (b == a) b = hosts[rng.uniform(hosts.size())];
        pairs.emplace_back(a, b);
      }
    }
    const double rate = bg.load * sc.links.capacity;
    const SimTime start = ms_to_us(bg.start_ms);
    const SimTime end = bg.duration_ms > 0 ? std::min(horizon, start + ms_to_us(bg.duration_ms)) : horizon;
    if (end > start) {
      const auto packets = static_cast<std::uint32_t>(std::max(1.0, std::floor(rate * us_to_ms(end - start))));
      for (const auto& [a, b] : pairs) {
        FlowSpec s;
        s.kind = FlowKind::Cbr;
        s.src = a;
        s.dst = b;
        s.start = start;
        s.packets = packets;
        s.rate_pkt_per_ms = rate;
        s.tag = "background";
        sim.add_flow(s);
      }
    }
  }

  if (sc.recon.enabled) {
    ReconConfig rc = sc.recon.params;
    rc.attacker = resolve(t, sc.recon.host, "attacker.recon.host", NodeKind::Host);
    rc.peer = resolve(t, sc.recon.peer, "attacker.recon.peer", NodeKind::Host);
    if (sc.recon.candidates.empty()) {
      for (NodeId h : t.hosts())
        if (h != rc.attacker && h != rc.peer) rc.candidates.push_back(h);
    } else {
      for (std::size_t i = 0; i < sc.recon.candidates.size(); ++i)
        rc.candidates.push_back(resolve(t, sc.recon.candidates[i],
                                        "attacker.recon.candidates[" + std::to_string(i) + "]", NodeKind::Host));
    }
    out.plan = schedule_recon(sim, rc);
    if (out.plan->end > horizon)
      throw ConfigError("horizon_ms", "recon schedule needs at least " + std::to_string(us_to_ms(out.plan->end)) + " ms");
  }

  if (sc.flood.enabled) {
    AttackPlan ap;
    for (std::size_t i = 0; i < sc.flood.targets.size(); ++i) {
      const std::string f = "attacker.flood.targets[" + std::to_string(i) + "]";
      ap.target_links.emplace_back(resolve(t, sc.flood.targets[i].first, f, NodeKind::Switch),
                                   resolve(t, sc.flood.targets[i].second, f, NodeKind::Switch));
    }
    for (std::size_t i = 0; i < sc.flood.decoys.size(); ++i)
      ap.decoys.push_back(
          resolve(t, sc.flood.decoys[i], "attacker.flood.decoys[" + std::to_string(i) + "]", NodeKind::Host));
    ap.rate_pkt_per_ms = sc.flood.rate_pkt_per_ms;
    ap.start_us = ms_to_us(sc.flood.start_ms);
    ap.duration_us = sc.flood.duration_ms > 0 ? ms_to_us(sc.flood.duration_ms) : horizon - ap.start_us;
    out.flood = schedule_flood(sim, ap);
  }

  for (std::size_t i = 0; i < sc.unresponsive.size(); ++i)
    sim.set_unresponsive(
        resolve(t, sc.unresponsive[i], "detection.unresponsive[" + std::to_string(i) + "]", NodeKind::Switch));

  out.trace = sim.run(horizon);
  out.detection = detection_metrics(out.trace);
  out.overhead = overhead_metrics(out.trace);

  std::ostringstream v;
  char buf[160];
  if (out.plan) {
    out.recon = analyze_recon(out.trace, *out.plan);
    DefaultRoutes routes(t, sc.sim.metric);
    out.score = score_recon(*out.recon, t, routes, out.plan->cfg.attacker);
    std::snprintf(buf, sizeof buf, "recon precision %.2f recall %.2f accuracy %.2f; ", out.score->precision(),
                  out.score->recall(), out.score->accuracy());
    v << buf;
  }
  if (sc.sim.defense.detection_enabled()) {
    std::snprintf(buf, sizeof buf, "detection accuracy %.2f alerts %zu; ", out.detection.accuracy,
                  out.trace.alerts.size());
    v << buf;
  }
  std::snprintf(buf, sizeof buf, "controller messages %llu; conservation %s",
                static_cast<unsigned long long>(out.overhead.controller_messages),
                out.trace.conservation.balanced() ? "ok" : "VIOLATED");
  v << buf;
  out.verdict = v.str();
  return out;
}

namespace {

json path_json(const std::vector<NodeId>& nodes, const Topology& t) {
  json a = json::array();
  for (NodeId n : nodes) a.push_back(t.node(n).label);
  return a;
}

json metrics_json(const DetectionMetrics& m) {
  json j = {{"tp", m.tp},
            {"fp", m.fp},
            {"fn", m.fn},
            {"tn", m.tn},
            {"accuracy", m.accuracy},
            {"fpr", m.fpr},
            {"fnr", m.fnr},
            {"fpr_undefined", m.fpr_undefined},
            {"fnr_undefined", m.fnr_undefined}};
  j["mean_rt_unresponsive_ms"] = m.mean_rt_unresponsive_ms ? json(*m.mean_rt_unresponsive_ms) : json();
  j["mean_rt_responsive_ms"] = m.mean_rt_responsive_ms ? json(*m.mean_rt_responsive_ms) : json();
  const std::string note = published_matrix_note(m);
  if (!note.empty()) j["note"] = note;
  return j;
}

json overhead_json(const OverheadSummary& o) {
  return {{"controller_messages", o.controller_messages},
          {"packet_ins", o.packet_ins},
          {"path_requests", o.path_requests},
          {"unique_requests", o.unique_requests},
          {"common_requests", o.common_requests},
          {"flow_mods", o.flow_mods},
          {"rule_entries_installed", o.rule_entries_installed},
          {"peak_rule_entries", o.peak_rule_entries},
          {"mean_processing_delay_ms", o.mean_processing_delay_ms},
          {"max_processing_delay_ms", o.max_processing_delay_ms},
          {"per_packet_phase_packets", o.per_packet_phase_packets},
          {"per_packet_phase_requests", o.per_packet_phase_requests},
          {"per_packet_ratio", o.per_packet_ratio},
          {"mean_requests_per_flow", o.mean_requests_per_flow},
          {"data_flows", o.data_flows},
          {"probe_loss", o.probe_loss}};
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << s;
}

}  // namespace

json summary_json(const Scenario& sc, const RunOutput& out) {
  const auto& k = out.trace.conservation;
  json j = {{"scenario", sc.name},
            {"seed", sc.seed},
            {"config_hash", sc.config_hash},
            {"horizon_ms", sc.horizon_ms},
            {"defense", std::string(to_string(sc.sim.defense.mode))},
            {"verdict", out.verdict},
            {"detection", metrics_json(out.detection)},
            {"overhead", overhead_json(out.overhead)},
            {"alerts", out.trace.alerts.size()},
            {"conservation",
             {{"injected", k.injected},
              {"delivered", k.delivered},
              {"dropped", k.dropped},
              {"in_flight", k.in_flight()},
              {"balanced", k.balanced()}}},
            {"control_packets_from_hosts", out.trace.control_packets_from_hosts}};
  if (out.score) {
    j["recon"] = {{"precision", out.score->precision()},
                  {"recall", out.score->recall()},
                  {"accuracy", out.score->accuracy()},
                  {"tp", out.score->tp},
                  {"fp", out.score->fp},
                  {"fn", out.score->fn},
                  {"tn", out.score->tn}};
  }
  return j;
}

void write_outputs(const Scenario& sc, const RunOutput& out, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path d(dir);
  const TraceHeader h{sc.name, sc.seed, sc.config_hash};
  const json prov = {{"scenario", sc.name}, {"seed", sc.seed}, {"config_hash", sc.config_hash}};
  const Topology& t = out.topo;

  if (sc.write_trace) {
    std::ostringstream os;
    write_jsonl(os, out.trace, h);
    write_file(d / "trace.jsonl", os.str());
  }
  {
    std::ostringstream os;
    write_rtt_csv(os, out.trace, h);
    write_file(d / "rtt.csv", os.str());
  }
  {
    std::ostringstream os;
    write_utilization_csv(os, out.trace, h);
    write_file(d / "utilization.csv", os.str());
  }
  if (out.recon) {
    json r = prov;
    r["threshold_ms"] = out.recon->threshold_ms;
    r["candidates"] = json::array();
    DefaultRoutes routes(t, sc.sim.metric);
    for (const auto& c : out.recon->candidates) {
      json e = {{"candidate", t.node(c.candidate).label},
                {"baseline_delta_ms", c.baseline_delta_ms},
                {"burst_delta_ms", c.burst_delta_ms},
                {"baseline_deltas_ms", c.baseline_deltas_ms},
                {"burst_deltas_ms", c.burst_deltas_ms},
                {"classified_shared", c.classified_shared},
                {"skipped", c.skipped}};
      if (c.skipped) e["skip_reason"] = c.skip_reason;
      if (!c.skipped && t.node(c.candidate).kind == NodeKind::Host) {
        json truth = json::array();
        for (const auto& [a, b] : shared_links_ground_truth(t, routes, out.plan->cfg.attacker, c.candidate))
          truth.push_back({t.node(a).label, t.node(b).label});
        e["ground_truth_shared_links"] = truth;
      }
      r["candidates"].push_back(e);
    }
    json inferred = json::array();
    for (NodeId n : out.recon->inferred_shared) inferred.push_back(t.node(n).label);
    r["inferred_shared_candidates"] = inferred;
    write_file(d / "recon.json", r.dump(2) + "\n");
  }
  {
    json a = prov;
    a["alerts"] = json::array();
    for (const Alert& al : out.trace.alerts)
      a["alerts"].push_back({{"switch", t.node(al.sw).label},
                             {"declared_at_ms", us_to_ms(al.declared_at)},
                             {"probes_sent", al.probes_sent},
                             {"cycle", al.cycle}});
    a["mitigation_at_ms"] = out.trace.mitigation_at ? json(us_to_ms(*out.trace.mitigation_at)) : json();
    write_file(d / "alerts.json", a.dump(2) + "\n");
  }
  {
    json o = prov;
    o["overhead"] = overhead_json(out.overhead);
    json series = json::array();
    for (const auto& p : out.overhead.rule_count_series) series.push_back({us_to_ms(p.t), p.entries});
    o["rule_count_series"] = series;
    json decisions = json::array();
    for (const auto& dr : out.trace.decisions)
      decisions.push_back({{"t_ms", us_to_ms(dr.t)},
                           {"flow", dr.flow},
                           {"index", dr.index},
                           {"decision", std::string(to_string(dr.kind))},
                           {"path", path_json(dr.path, t)},
                           {"reverse", path_json(dr.reverse, t)},
                           {"no_diversity", dr.no_diversity}});
    o["decisions"] = decisions;
    write_file(d / "overhead.json", o.dump(2) + "\n");
  }
  if (out.flood) {
    json f = prov;
    f["covered"] = json::array();
    for (const auto& c : out.flood->covered)
      f["covered"].push_back({{"link", {t.node(c.link.first).label, t.node(c.link.second).label}},
                              {"src", t.node(c.src).label},
                              {"dst", t.node(c.dst).label},
                              {"flow", c.flow}});
    f["uncoverable"] = json::array();
    for (const auto& l : out.flood->uncoverable)
      f["uncoverable"].push_back({t.node(l.first).label, t.node(l.second).label});
    write_file(d / "flood.json", f.dump(2) + "\n");
  }
  write_file(d / "summary.json", summary_json(sc, out).dump(2) + "\n");
}

}  // namespace mirage
