#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mirage/analysis.hpp"
#include "mirage/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mirage;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kPartial = 2;

constexpr const char* kDatasetEnv = "MIRAGE_DATASET_ROOT";

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << s;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("scenario", "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", std::string("invalid JSON: ") + e.what());
  }
}

std::string base_dir_of(const std::string& path) {
  const fs::path d = fs::path(path).parent_path();
  return d.empty() ? "." : d.string();
}

// Runs `n` independent jobs on up to `jobs` threads; results land by index.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::clamp<std::size_t>(jobs < 1 ? 1 : jobs, 1, std::max<std::size_t>(1, n));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

// analyze

struct AnalyzeOpts {
  std::string dir;
  std::string out = "analysis";
  bool matrix = false;
  int jobs = 1;
};

int cmd_analyze(const AnalyzeOpts& o) {
  std::string dir = o.dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(kDatasetEnv)) dir = env;
  }
  if (dir.empty()) {
    std::cerr << "analyze: no dataset directory given and " << kDatasetEnv << " is unset\n";
    return kUsage;
  }
  if (!fs::is_directory(dir)) {
    std::cerr << "analyze: not a directory: " << dir << "\n";
    return kUsage;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".gml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) {
    std::cerr << "analyze: no .gml files in " << dir << "\n";
    return kUsage;
  }

  struct Row {
    std::optional<DiversityReport> report;
    std::optional<Topology> topo;
    std::string error;
  };
  std::vector<Row> rows(files.size());
  parallel_for(files.size(), o.jobs, [&](std::size_t i) {
    try {
      auto parsed = load_gml_file(files[i].string());
      parsed.topology.set_name(files[i].filename().string());
      rows[i].report = diversity_report(parsed.topology, o.matrix);
      if (o.matrix) rows[i].topo = std::move(parsed.topology);
    } catch (const Error& e) {
      rows[i].error = e.what();
    }
  });

  fs::create_directories(o.out);
  std::ostringstream csv, detail;
  csv << "topology,percentage\n";
  detail << "topology,switches,components,pairs,pairs_with_alternates,percentage\n";
  std::vector<DiversityReport> ok;
  json failed = json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string name = files[i].filename().string();
    if (!rows[i].report) {
      std::cerr << "analyze: cannot parse " << name << ": " << rows[i].error << "\n";
      failed.push_back({{"file", name}, {"error", rows[i].error}});
      continue;
    }
    const DiversityReport& r = *rows[i].report;
    csv << name << ',' << fmt(r.percentage) << '\n';
    detail << name << ',' << r.switch_count << ',' << r.components << ',' << r.pair_count << ','
           << r.pairs_with_alternates << ',' << fmt(r.percentage, 4) << '\n';
    if (o.matrix) {
      const fs::path mdir = fs::path(o.out) / "matrix";
      fs::create_directories(mdir);
      const std::string stem = files[i].stem().string();
      std::ostringstream m;
      write_matrix_csv(m, r, *rows[i].topo);
      write_text(mdir / (stem + ".csv"), m.str());
      std::ostringstream ppm;
      write_matrix_ppm(ppm, r);
      write_text(mdir / (stem + ".ppm"), ppm.str());
    }
    ok.push_back(r);
  }
  write_text(fs::path(o.out) / "diversity.csv", csv.str());
  write_text(fs::path(o.out) / "diversity_detail.csv", detail.str());

  json summary = {{"dataset", dir}, {"files", files.size()}, {"parsed", ok.size()}, {"failed", failed}};
  if (!ok.empty()) {
    const DatasetSummary s = dataset_classification(ok);
    summary["topologies"] = s.topologies;
    summary["zero_redundancy"] = s.zero_redundancy;
    summary["zero_redundancy_names"] = s.zero_names;
    summary["histogram_10pt_bins"] = s.histogram;
    std::cout << "analyzed " << s.topologies << " of " << files.size() << " topologies; zero redundancy: "
              << s.zero_redundancy << " of " << s.topologies << "\n";
  }
  write_text(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << (fs::path(o.out) / "diversity.csv").string() << "\n";
  if (!failed.empty()) {
    std::cerr << "analyze: " << failed.size() << " file(s) could not be parsed\n";
    return kPartial;
  }
  return kOk;
}

// simulate

struct SimulateOpts {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_simulate(const SimulateOpts& o) {
  json j = read_json(o.scenario);
  if (o.seed) j = with_seed(std::move(j), *o.seed);
  const Scenario sc = parse_scenario(j, base_dir_of(o.scenario));
  const RunOutput out = run_scenario(sc);
  const std::string dir = o.out.empty() ? sc.output_dir : o.out;
  write_outputs(sc, out, dir);
  std::cout << sc.name << " seed " << sc.seed << ": " << out.verdict << "\n";
  constexpr std::size_t kShownAlerts = 5;
  for (std::size_t i = 0; i < std::min(kShownAlerts, out.trace.alerts.size()); ++i) {
    const Alert& a = out.trace.alerts[i];
    std::cout << "alert: switch " << out.topo.node(a.sw).label << " unresponsive at "
                << fmt(us_to_ms(a.declared_at), 3) << " ms after " << a.probes_sent << " probes\n";
  }
  if (out.trace.alerts.size() > kShownAlerts)
    std::cout << "(" << out.trace.alerts.size() - kShownAlerts << " more alerts in alerts.json)\n";
  if (out.flood)
    for (const auto& l : out.flood->uncoverable)
      std::cerr << "flood: no decoy route crosses " << out.topo.node(l.first).label << "-"
                << out.topo.node(l.second).label << "\n";
  std::cout << "outputs in " << dir << "\n";
  return out.trace.conservation.balanced() ? kOk : kPartial;
}

// sweep

struct SweepOpts {
  std::string scenario;
  std::string param;
  std::vector<double> values;
  std::optional<std::uint64_t> seed;
  std::string out = "sweep";
  int jobs = 1;
};

int cmd_sweep(const SweepOpts& o) {
  if (!is_sweep_param(o.param)) {
    std::cerr << "sweep: unknown parameter '" << o.param << "' (load | lambda | probeInterval | burst_rate)\n";
    return kUsage;
  }
  if (o.values.empty()) {
    std::cerr << "sweep: no values\n";
    return kUsage;
  }
  const json base = read_json(o.scenario);
  const std::string bdir = base_dir_of(o.scenario);
  if (!base.contains("seed") || !base["seed"].is_number_unsigned())
    throw ConfigError("seed", "required non-negative integer");
  const std::uint64_t seed0 = o.seed ? *o.seed : base["seed"].get<std::uint64_t>();

  // Validate every point before running any.
  std::vector<Scenario> points;
  for (std::size_t i = 0; i < o.values.size(); ++i)
    points.push_back(parse_scenario(with_seed(with_param(base, o.param, o.values[i]), seed0 + i), bdir));

  fs::create_directories(o.out);
  std::vector<json> summaries(points.size());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), o.jobs, [&](std::size_t i) {
    try {
      const RunOutput out = run_scenario(points[i]);
      write_outputs(points[i], out, (fs::path(o.out) / ("run_" + std::to_string(i))).string());
      summaries[i] = summary_json(points[i], out);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::ostringstream csv;
  csv << "param,value,seed,config_hash,detection_accuracy,fpr,fnr,probe_loss,alerts,controller_messages,"
         "packet_ins,path_requests,flow_mods,rule_entries_installed,peak_rule_entries,per_packet_ratio,"
         "recon_precision,recon_recall,recon_accuracy,injected,delivered,dropped\n";
  int failures = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "sweep: " << o.param << "=" << o.values[i] << " failed: " << errors[i] << "\n";
      ++failures;
      continue;
    }
    const json& s = summaries[i];
    const json& d = s["detection"];
    const json& h = s["overhead"];
    const json& k = s["conservation"];
    auto num = [](const json& v, int prec = 6) { return v.is_null() ? std::string() : fmt(v.get<double>(), prec); };
    csv << o.param << ',' << json(o.values[i]).dump() << ',' << points[i].seed << ',' << points[i].config_hash
        << ',' << num(d["accuracy"]) << ',' << num(d["fpr"]) << ',' << num(d["fnr"]) << ','
        << num(h["probe_loss"]) << ',' << s["alerts"].get<std::size_t>() << ','
        << h["controller_messages"].get<std::uint64_t>() << ',' << h["packet_ins"].get<std::uint64_t>() << ','
        << h["path_requests"].get<std::uint64_t>() << ',' << h["flow_mods"].get<std::uint64_t>() << ','
        << h["rule_entries_installed"].get<std::uint64_t>() << ',' << h["peak_rule_entries"].get<std::size_t>()
        << ',' << num(h["per_packet_ratio"]) << ',';
    if (s.contains("recon"))
      csv << num(s["recon"]["precision"]) << ',' << num(s["recon"]["recall"]) << ',' << num(s["recon"]["accuracy"]);
    else
      csv << ",,";
    csv << ',' << k["injected"].get<std::uint64_t>() << ',' << k["delivered"].get<std::uint64_t>() << ','
        << k["dropped"].get<std::uint64_t>() << '\n';
  }
  const fs::path path = fs::path(o.out) / "sweep.csv";
  write_text(path, csv.str());
  std::cout << "wrote " << path.string() << " (" << points.size() - failures << " of " << points.size()
            << " points)\n";
  return failures ? kPartial : kOk;
}

// report

struct ReportOpts {
  std::string run_dir;
  std::string counts;
};

int cmd_report(const ReportOpts& o) {
  if (!o.counts.empty()) {
    int c[4];
    char tail;
    if (std::sscanf(o.counts.c_str(), "%d,%d,%d,%d%c", &c[0], &c[1], &c[2], &c[3], &tail) != 4) {
      std::cerr << "report: --counts expects tp,fp,fn,tn\n";
      return kUsage;
    }
    std::cout << detection_report(metrics_from_counts(c[0], c[1], c[2], c[3]));
    return kOk;
  }
  if (o.run_dir.empty()) {
    std::cerr << "report: give a run directory or --counts\n";
    return kUsage;
  }
  const fs::path dir(o.run_dir);
  if (!fs::exists(dir / "summary.json")) {
    std::cerr << "report: no summary.json in " << o.run_dir << "\n";
    return kUsage;
  }
  json s;
  {
    std::ifstream in(dir / "summary.json");
    s = json::parse(in);
  }
  std::cout << "scenario " << s["scenario"].get<std::string>() << "  seed " << s["seed"] << "  config "
            << s["config_hash"].get<std::string>().substr(0, 16) << "  defense " << s["defense"].get<std::string>()
            << "\n";
  std::cout << "verdict: " << s["verdict"].get<std::string>() << "\n\n";

  const json& d = s["detection"];
  DetectionMetrics m = metrics_from_counts(d["tp"], d["fp"], d["fn"], d["tn"]);
  if (!d["mean_rt_unresponsive_ms"].is_null()) m.mean_rt_unresponsive_ms = d["mean_rt_unresponsive_ms"].get<double>();
  if (!d["mean_rt_responsive_ms"].is_null()) m.mean_rt_responsive_ms = d["mean_rt_responsive_ms"].get<double>();
  std::cout << "detection\n" << detection_report(m);

  if (fs::exists(dir / "alerts.json")) {
    std::ifstream in(dir / "alerts.json");
    const json a = json::parse(in);
    const auto& alerts = a["alerts"];
    for (std::size_t i = 0; i < std::min<std::size_t>(alerts.size(), 10); ++i) {
      const auto& al = alerts[i];
      std::cout << "  alert: switch " << al["switch"].get<std::string>() << " at "
                << fmt(al["declared_at_ms"].get<double>(), 3) << " ms, " << al["probes_sent"] << " probes\n";
    }
    if (alerts.size() > 10) std::cout << "  (" << alerts.size() - 10 << " more)\n";
    if (!a["mitigation_at_ms"].is_null())
      std::cout << "  mitigation active from " << fmt(a["mitigation_at_ms"].get<double>(), 3) << " ms\n";
  }

  const json& h = s["overhead"];
  std::cout << "\noverhead\n"
            << "  controller messages " << h["controller_messages"] << " (packet-in " << h["packet_ins"]
            << ", rule installs " << h["flow_mods"] << ")\n"
            << "  path requests " << h["path_requests"] << " (unique " << h["unique_requests"] << ", common "
            << h["common_requests"] << ")\n"
            << "  rule entries installed " << h["rule_entries_installed"] << ", peak " << h["peak_rule_entries"]
            << "\n"
            << "  per-packet phase: " << h["per_packet_phase_requests"] << " requests for "
            << h["per_packet_phase_packets"] << " packets (ratio " << fmt(h["per_packet_ratio"].get<double>(), 3)
            << ")\n"
            << "  processing delay mean " << fmt(h["mean_processing_delay_ms"].get<double>(), 3) << " ms, max "
            << fmt(h["max_processing_delay_ms"].get<double>(), 3) << " ms\n"
            << "  probe loss " << fmt(100.0 * h["probe_loss"].get<double>()) << "%\n";

  if (s.contains("recon")) {
    const json& r = s["recon"];
    std::cout << "\nrecon\n  precision " << fmt(r["precision"].get<double>()) << " recall "
              << fmt(r["recall"].get<double>()) << " accuracy " << fmt(r["accuracy"].get<double>()) << " (tp "
              << r["tp"] << " fp " << r["fp"] << " fn " << r["fn"] << " tn " << r["tn"] << ")\n";
  }
  const json& k = s["conservation"];
  std::cout << "\nconservation: injected " << k["injected"] << " = delivered " << k["delivered"] << " + dropped "
            << k["dropped"] << " + in flight " << k["in_flight"] << (k["balanced"].get<bool>() ? "" : "  VIOLATED")
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDN control-channel reconnaissance and defense simulator"};
  app.require_subcommand(1);

  AnalyzeOpts ao;
  auto* analyze = app.add_subcommand("analyze", "Path-diversity analysis of a directory of GML topologies");
  analyze->add_option("dataset_dir", ao.dir, std::string("GML directory (default: $") + kDatasetEnv + ")");
  analyze->add_option("--out", ao.out, "Output directory")->capture_default_str();
  analyze->add_flag("--matrix", ao.matrix, "Also write per-topology alternate-path matrices (CSV + PPM)");
  analyze->add_option("--jobs", ao.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SimulateOpts so;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  simulate->add_option("scenario", so.scenario, "Scenario JSON file")->required();
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--out", so.out, "Output directory (default: the scenario's output.dir)");

  SweepOpts wo;
  std::uint64_t sweep_seed = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep->add_option("scenario", wo.scenario, "Scenario JSON file")->required();
  sweep->add_option("--param", wo.param, "load | lambda | probeInterval | burst_rate")->required();
  sweep->add_option("--values", wo.values, "Comma-separated values")->required()->delimiter(',');
  auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "Base seed; point i uses seed + i");
  sweep->add_option("--out", wo.out, "Output directory")->capture_default_str();
  sweep->add_option("--jobs", wo.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ReportOpts ro;
  auto* report = app.add_subcommand("report", "Summarise a run directory or a confusion matrix");
  report->add_option("run_dir", ro.run_dir, "Directory written by simulate");
  report->add_option("--counts", ro.counts, "tp,fp,fn,tn");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (*sim_seed_opt) so.seed = sim_seed;
  if (*sweep_seed_opt) wo.seed = sweep_seed;

  try {
    if (*analyze) return cmd_analyze(ao);
    if (*simulate) return cmd_simulate(so);
    if (*sweep) return cmd_sweep(wo);
    if (*report) return cmd_report(ro);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartial;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartial;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartial;
  }
  return kUsage;
}
