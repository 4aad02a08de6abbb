// One line per acceptance criterion. Exit 0 when all pass, 77 when the only
// failure is the missing topology dataset, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "mirage/analysis.hpp"
#include "mirage/scenario.hpp"
#include "oracles.hpp"

using namespace mirage;
namespace fs = std::filesystem;

namespace {

const std::string kSource = MIRAGE_SOURCE_DIR;
const std::string kCli = MIRAGE_CLI_PATH;

struct Verdict {
  bool pass = false;
  std::string detail;
  bool unavailable = false;  // input data missing, not a wrong result
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mirage_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> head;
  std::vector<std::map<std::string, std::string>> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (head.empty()) {
      head = split(line);
      continue;
    }
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < head.size() && i < cells.size(); ++i) row[head[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

// Diversity percentages over a Topology Zoo snapshot.
Verdict criterion1() {
  const char* root = std::getenv("MIRAGE_DATASET_ROOT");
  if (!root || !fs::is_directory(root))
    return {false, "Topology Zoo dataset not available (set MIRAGE_DATASET_ROOT to the GML directory)", true};
  std::map<std::string, double> reference;
  {
    std::ifstream in(kSource + "/tests/data/reference_diversity.tsv");
    std::string name;
    double pct;
    while (in >> name >> pct) reference[name] = pct;
  }
  const fs::path out = scratch("analyze");
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_cli("analyze \"" + std::string(root) + "\" --out \"" + out.string() + "\"", out / "log.txt");
  const double secs = seconds_since(t0);
  if (rc != 0 && rc != 2) return {false, "analyze exited " + std::to_string(rc)};
  int present = 0, matched = 0;
  double lo = 100, hi = 0;
  std::string worst;
  double worst_err = 0;
  for (const auto& row : read_csv(out / "diversity.csv")) {
    const auto it = reference.find(row.at("topology"));
    if (it == reference.end()) continue;
    ++present;
    const double err = std::abs(std::stod(row.at("percentage")) - it->second);
    if (err <= 0.5) {
      ++matched;
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    } else if (err > worst_err) {
      worst_err = err;
      worst = it->first;
    }
  }
  std::ifstream sj(out / "summary.json");
  const auto summary = nlohmann::json::parse(sj);
  const std::size_t total = summary.value("topologies", std::size_t{0});
  const std::size_t zero = summary.value("zero_redundancy", std::size_t{0});
  const bool full = total == 261;
  bool pass = matched >= 20 && matched == present && hi - lo >= 50 && secs < 120;
  if (full) pass = pass && zero == 30;
  std::string d = std::to_string(matched) + "/" + std::to_string(present) + " reference topologies within 0.5 pt";
  if (!worst.empty()) d += " (worst " + worst + " off by " + fmt("%.2f", worst_err) + ")";
  d += "; zero redundancy " + std::to_string(zero) + " of " + std::to_string(total);
  if (!full) d += " (partial snapshot, 30/261 check needs all 261 files)";
  d += "; " + fmt("%.1f s", secs);
  return {pass, d};
}

std::vector<int> diverse_seeds(int want) {
  std::vector<int> seeds;
  for (int seed = 1; static_cast<int>(seeds.size()) < want && seed < 500; ++seed)
    if (oracle::recon_case(seed, true)) seeds.push_back(seed);
  return seeds;
}

// Undefended recon against the routing ground truth.
Verdict criterion2(const std::vector<int>& seeds) {
  int exact = 0, candidates = 0;
  double slowest = 0;
  std::string bad;
  for (int seed : seeds) {
    const auto rc = oracle::recon_case(seed, false);
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = oracle::run_recon(*rc, DefenseMode::Off);
    slowest = std::max(slowest, seconds_since(t0));
    const auto again = oracle::run_recon(*rc, DefenseMode::Off);
    candidates += run.score.evaluated();
    bool ok = run.score.fp == 0 && run.score.fn == 0 &&
              run.score.evaluated() == static_cast<int>(rc->candidates.size()) &&
              again.result.inferred_shared == run.result.inferred_shared;
    if (ok) ++exact;
    else bad += " seed" + std::to_string(seed);
  }
  const bool pass = seeds.size() >= 10 && exact == static_cast<int>(seeds.size()) && slowest < 10;
  return {pass, std::to_string(exact) + "/" + std::to_string(seeds.size()) + " topologies exact over " +
                    std::to_string(candidates) + " candidates, slowest " + fmt("%.2f s", slowest) +
                    (bad.empty() ? "" : ";" + bad)};
}

// Threshold separates the classes when every shared candidate's shift exceeds
// it and no disjoint one does.
bool separable(const oracle::ReconCase& rc, const oracle::ReconRun& run) {
  DefaultRoutes routes(rc.topo);
  for (const auto& v : run.result.candidates) {
    if (v.skipped) continue;
    const bool shared = !shared_links_ground_truth(rc.topo, routes, rc.attacker, v.candidate).empty();
    const bool above = v.burst_delta_ms - v.baseline_delta_ms > run.result.threshold_ms;
    if (shared != above) return false;
  }
  return true;
}

// Path diversity against the same recon.
Verdict criterion3(const std::vector<int>& seeds) {
  int correct = 0, total = 0, over = 0, sep_off = 0, sep_on = 0, fp = 0, fn = 0;
  for (int seed : seeds) {
    const auto rc = oracle::recon_case(seed, true);
    const auto off = oracle::run_recon(*rc, DefenseMode::Off);
    const auto on = oracle::run_recon(*rc, DefenseMode::Full);
    sep_off += separable(*rc, off);
    sep_on += separable(*rc, on);
    correct += on.score.tp + on.score.tn;
    total += on.score.evaluated();
    fp += on.score.fp;
    fn += on.score.fn;
    over += on.score.accuracy() > 0.5;
  }
  const double acc = total ? static_cast<double>(correct) / total : 1.0;
  const int n = static_cast<int>(seeds.size());
  const bool pass = n >= 10 && over == 0 && acc <= 0.5 && sep_off == n && sep_on == 0;
  return {pass, "defended accuracy " + fmt("%.3f", acc) + " (" + std::to_string(over) + " of " + std::to_string(n) +
                    " topologies above 0.5; errors fp " + std::to_string(fp) + " fn " + std::to_string(fn) +
                    "); threshold separates classes in " + std::to_string(sep_off) + "/" + std::to_string(n) +
                    " undefended, " + std::to_string(sep_on) + "/" + std::to_string(n) + " defended"};
}

// Probe schedule, lossless campaign and the published-matrix note.
Verdict criterion4() {
  Topology t = place_controller(build::random_connected(12, 5, 4), MaxDegree{});
  SimConfig c;
  c.record_events = false;
  c.defense.mode = DefenseMode::DetectOnly;
  c.defense.max_cycles = 1;
  c.defense.probe_start = 250'000;
  const NodeId csw = t.attachment_switch(*t.controller());
  const NodeId dead = csw == 7 ? 8 : 7;
  Simulator sim(t, c);
  sim.set_unresponsive(dead);
  const Trace tr = sim.run(10'000'000);
  const SimTime expect = c.defense.probe_start + 2 * c.defense.probe.interval_us();
  bool timing = tr.alerts.size() == 1 && tr.alerts[0].sw == dead && tr.alerts[0].probes_sent == 3 &&
                tr.alerts[0].declared_at == expect;
  int probes_to_dead = 0;
  for (const auto& p : tr.probes)
    if (p.sw == dead) probes_to_dead = p.probes_sent;
  timing = timing && probes_to_dead == 3;

  Topology big = place_controller(build::random_connected(50, 30, 21), MaxDegree{});
  SimConfig bc = c;
  bc.defense.probe_start = 0;
  Simulator campaign(big, bc);
  std::map<NodeId, bool> truth;
  for (NodeId s : big.switches()) truth[s] = false;
  Rng rng(21);
  const NodeId bsw = big.attachment_switch(*big.controller());
  for (int down = 0; down < 8;) {
    const NodeId s = static_cast<NodeId>(rng.uniform(50));
    if (s == bsw || truth[s]) continue;
    truth[s] = true;
    campaign.set_unresponsive(s);
    ++down;
  }
  const auto m = detection_metrics(truth, campaign.run(10'000'000).alerts);

  const std::string report = detection_report(metrics_from_counts(7, 2, 1, 40));
  const bool note = report.find("accuracy 94.00%") != std::string::npos &&
                    report.find("88%") != std::string::npos && report.find("note:") != std::string::npos;
  const bool pass = timing && m.tp == 8 && m.fn == 0 && note;
  std::string d = "alert after " + std::to_string(tr.alerts.empty() ? 0 : tr.alerts[0].probes_sent) + " probes at t0+" +
                  fmt("%.3f s", tr.alerts.empty() ? -1.0 : us_to_ms(tr.alerts[0].declared_at - c.defense.probe_start) / 1000) +
                  "; 50-switch campaign tp=" + std::to_string(m.tp) + " fn=" + std::to_string(m.fn) +
                  " fp=" + std::to_string(m.fp) + "; 7/2/1/40 reported as 94.00% with discrepancy note: " +
                  (note ? "yes" : "no");
  return {pass, d};
}

// Exhaustive pool law for n <= 8.
Verdict criterion5() {
  long pools = 0, bad = 0;
  auto check = [&](const std::vector<double>& costs) {
    std::vector<Path> paths;
    for (std::size_t i = 0; i < costs.size(); ++i) {
      Path p;
      p.nodes = {0, static_cast<NodeId>(10 + i), 1};
      p.cost = costs[i];
      paths.push_back(p);
    }
    PathPool pool(0, 1, paths);
    const Path global_min = *std::min_element(paths.begin(), paths.end(), cost_then_lexicographic);
    std::set<std::vector<NodeId>> seen;
    double last = -1;
    bool ok = true;
    for (std::size_t i = 0; i < costs.size(); ++i) {
      const Path& p = pool.select_next();
      ok = ok && p.cost >= last && seen.insert(p.nodes).second;
      last = p.cost;
    }
    ok = ok && seen.size() == costs.size() && pool.select_next() == global_min;
    ++pools;
    bad += !ok;
  };
  for (int n = 1; n <= 8; ++n) {
    std::vector<double> perm(n);
    std::iota(perm.begin(), perm.end(), 0.0);
    do check(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<int> digits(n, 0);
    for (;;) {
      check(std::vector<double>(digits.begin(), digits.end()));
      int i = 0;
      while (i < n && ++digits[i] == 3) digits[i++] = 0;
      if (i == n) break;
    }
  }
  return {bad == 0, std::to_string(pools) + " pools (all cost permutations and all {0,1,2} tie patterns, n<=8), " +
                        std::to_string(bad) + " violations"};
}

// Per-packet rule accounting.
Verdict criterion6() {
  std::string d;
  bool pass = true;
  for (bool diverse : {false, true}) {
    Topology t = place_controller(diverse ? build::ring(6) : build::path(4), AtNode{0});
    const NodeId a = attach_host(t, 1, "a");
    const NodeId b = attach_host(t, diverse ? 4 : 3, "b");
    SimConfig c;
    c.defense.mode = DefenseMode::Full;
    c.defense.lambda = 5;
    c.defense.max_cycles = 1;
    c.defense.probe_start = 10'000'000;
    Simulator sim(t, c);
    FlowSpec f;
    f.kind = FlowKind::Cbr;
    f.src = a;
    f.dst = b;
    f.start = 1000;
    f.packets = 10;
    f.rate_pkt_per_ms = 0.2;
    const FlowId id = sim.add_flow(f);
    const Trace tr = sim.run(1'000'000);
    const FlowStats& s = tr.flows.at(id);
    const auto o = overhead_metrics(tr);
    const bool ok = s.path_requests == 6 && s.unique_requests == 5 && s.common_requests == 1 &&
                    tr.controller.path_requests == 6 && o.per_packet_phase_packets == 5 &&
                    o.per_packet_phase_requests == 5 && s.delivered == 10;
    pass = pass && ok;
    d += std::string(diverse ? "; ring" : "line") + ": " + std::to_string(s.path_requests) + " requests (" +
         std::to_string(s.unique_requests) + " unique + " + std::to_string(s.common_requests) + " common), " +
         std::to_string(o.per_packet_phase_requests) + ":" + std::to_string(o.per_packet_phase_packets) +
         " per-packet phase";
  }
  return {pass, d};
}

bool nonincreasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::less<>()) == v.end();
}
bool nondecreasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater<>()) == v.end();
}

// Sweep shapes through the command-line harness.
Verdict criterion7() {
  const fs::path load_dir = scratch("sweep_load");
  const int rc1 = run_cli("sweep \"" + kSource + "/scenarios/abilene.json\" --param load --values 0,0.5,1,1.5,2 --out \"" +
                              load_dir.string() + "\"",
                          load_dir / "log.txt");
  const fs::path lambda_dir = scratch("sweep_lambda");
  const int rc2 = run_cli("sweep \"" + kSource + "/scenarios/star.json\" --param lambda --values 0,2,5,10 --out \"" +
                              lambda_dir.string() + "\"",
                          lambda_dir / "log.txt");
  if (rc1 != 0 || rc2 != 0)
    return {false, "sweep exited " + std::to_string(rc1) + "/" + std::to_string(rc2)};
  std::vector<double> acc, loss, msgs, rules;
  for (const auto& r : read_csv(load_dir / "sweep.csv")) {
    acc.push_back(std::stod(r.at("detection_accuracy")));
    loss.push_back(std::stod(r.at("probe_loss")));
  }
  for (const auto& r : read_csv(lambda_dir / "sweep.csv")) {
    msgs.push_back(std::stod(r.at("controller_messages")));
    rules.push_back(std::stod(r.at("rule_entries_installed")));
  }
  const bool load_ok = acc.size() == 5 && nonincreasing(acc) && nondecreasing(loss) && loss.back() > loss.front() &&
                       acc.back() < acc.front();
  const bool lambda_ok = msgs.size() == 4 && nondecreasing(msgs) && nondecreasing(rules) && msgs[2] > msgs[0];
  auto list = [](const std::vector<double>& v, const char* f) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(f, x);
    return s;
  };
  return {load_ok && lambda_ok, "load 0..2: accuracy [" + list(acc, "%.3f") + "], probe loss [" + list(loss, "%.3f") +
                                    "]; lambda 0,2,5,10: messages [" + list(msgs, "%.0f") + "], rule entries [" +
                                    list(rules, "%.0f") + "]"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Conservation on every bundled scenario plus random stress; byte-identical reruns.
Verdict criterion8() {
  int scenarios = 0, balanced = 0, identical = 0;
  std::string bad;
  for (const auto& e : fs::directory_iterator(kSource + "/scenarios")) {
    if (e.path().extension() != ".json") continue;
    ++scenarios;
    const Scenario sc = load_scenario(e.path().string());
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunOutput r1 = run_scenario(sc);
    write_outputs(sc, r1, a.string());
    const RunOutput r2 = run_scenario(load_scenario(e.path().string()));
    write_outputs(sc, r2, b.string());
    balanced += r1.trace.conservation.balanced();
    bool same = true;
    for (const auto& f : fs::directory_iterator(a)) same = same && slurp(f.path()) == slurp(b / f.path().filename());
    identical += same;
    if (!same || !r1.trace.conservation.balanced()) bad += " " + e.path().filename().string();
  }
  int stress = 0, stress_ok = 0;
  Rng rng(88);
  for (int run = 0; run < 20; ++run) {
    Topology t = place_controller(build::random_connected(5 + run % 8, run % 5, rng.next()), MaxDegree{});
    t = attach_hosts(t, 6, rng.next());
    SimConfig c;
    c.record_events = false;
    if (run % 2) c.defense.mode = DefenseMode::Full;
    Simulator sim(t, c);
    const auto hosts = t.hosts();
    for (int i = 0; i < 6; ++i) {
      const NodeId x = hosts[rng.uniform(hosts.size())], y = hosts[rng.uniform(hosts.size())];
      if (x == y) continue;
      FlowSpec f;
      f.kind = i % 2 ? FlowKind::Ping : FlowKind::Cbr;
      f.src = x;
      f.dst = y;
      f.start = static_cast<SimTime>(rng.uniform(5000));
      f.packets = 500;
      f.rate_pkt_per_ms = 200;
      sim.add_flow(f);
    }
    const Trace tr = sim.run(static_cast<SimTime>(2000 + rng.uniform(40'000)));
    ++stress;
    stress_ok += tr.conservation.balanced();
  }
  const bool pass = scenarios > 0 && balanced == scenarios && identical == scenarios && stress_ok == stress;
  return {pass, std::to_string(balanced) + "/" + std::to_string(scenarios) + " bundled scenarios balanced, " +
                    std::to_string(identical) + "/" + std::to_string(scenarios) + " byte-identical reruns, " +
                    std::to_string(stress_ok) + "/" + std::to_string(stress) + " overload runs balanced" +
                    (bad.empty() ? "" : ";" + bad)};
}

// Routing against brute-force oracles.
Verdict criterion9() {
  Rng rng(909);
  int graphs = 0, sp_bad = 0, enum_bad = 0, alt_bad = 0, compared = 0, truncated = 0;
  for (; graphs < 200; ++graphs) {
    const int n = 2 + static_cast<int>(rng.uniform(14));
    Topology t = oracle::random_graph(rng, n, 0.15);
    for (LinkId l = 0; l < t.link_count(); ++l) {
      t.link(l).latency_ms = 1 + static_cast<double>(rng.uniform(5));
      t.link(l).capacity = 1 + static_cast<double>(rng.uniform(100));
    }
    for (Metric m : {Metric::HopCount, Metric::LatencySum, Metric::InverseCapacityMin}) {
      for (NodeId s = 0; s < t.node_count(); ++s) {
        const auto dm = dijkstra(t, s, m);
        const auto bf = oracle::bellman_ford(t, s, metric_weight(m), metric_combine(m));
        for (NodeId v = 0; v < t.node_count(); ++v) sp_bad += std::abs(dm.dist[v] - bf[v]) > 1e-9;
      }
    }
    const BridgeIndex bi(t);
    for (NodeId u = 0; u < t.node_count(); ++u) {
      for (NodeId v = u + 1; v < t.node_count(); ++v) {
        const auto e = enumerate_all_paths(t, u, v, n, 20'000);
        if (e.truncated) {
          ++truncated;
          continue;
        }
        ++compared;
        std::set<std::vector<NodeId>> got;
        for (const auto& p : e.paths) got.insert(p.nodes);
        enum_bad += got.size() != e.paths.size() || got != oracle::all_simple_paths(t, u, v);
        alt_bad += bi.has_alternate(u, v) != (e.paths.size() >= 2);
        alt_bad += has_alternate_path(t, u, v) != has_alternate_path(t, v, u);
      }
    }
  }
  const bool pass = sp_bad == 0 && enum_bad == 0 && alt_bad == 0 && compared > 0;
  return {pass, std::to_string(graphs) + " graphs: dijkstra/Bellman-Ford mismatches " + std::to_string(sp_bad) +
                    ", enumeration mismatches " + std::to_string(enum_bad) + " over " + std::to_string(compared) +
                    " pairs (" + std::to_string(truncated) + " truncated skipped), alternate-path mismatches " +
                    std::to_string(alt_bad)};
}

}  // namespace

int main() {
  const auto seeds = diverse_seeds(10);
  std::vector<std::pair<int, Verdict>> results;
  auto record = [&](int n, Verdict (*f)()) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s: %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(n, v);
  };
  static std::vector<int> s;
  s = seeds;
  record(1, criterion1);
  record(2, [] { return criterion2(s); });
  record(3, [] { return criterion3(s); });
  record(4, criterion4);
  record(5, criterion5);
  record(6, criterion6);
  record(7, criterion7);
  record(8, criterion8);
  record(9, criterion9);

  int failed = 0, unavailable = 0;
  for (const auto& [n, v] : results) {
    if (v.pass) continue;
    ++failed;
    unavailable += v.unavailable;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(results.size()) - failed, results.size());
  if (failed == 0) return 0;
  return failed == unavailable ? 77 : 1;
}
