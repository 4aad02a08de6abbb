#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mirage/analysis.hpp"
#include "mirage/scenario.hpp"

namespace py = pybind11;
using namespace mirage;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict metrics_dict(const DetectionMetrics& m) {
  py::dict d;
  d["tp"] = m.tp;
  d["fp"] = m.fp;
  d["fn"] = m.fn;
  d["tn"] = m.tn;
  d["accuracy"] = m.accuracy;
  d["fpr"] = m.fpr_undefined ? py::none() : py::object(py::float_(m.fpr));
  d["fnr"] = m.fnr_undefined ? py::none() : py::object(py::float_(m.fnr));
  return d;
}

Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
  Scenario sc = load_scenario(path);
  if (seed) sc = parse_scenario(with_seed(sc.raw, *seed), sc.base_dir);
  return sc;
}

}  // namespace

PYBIND11_MODULE(mirage, m) {
  m.doc() = "SDN control-channel reconnaissance and defense simulator";

  auto base = py::register_exception<Error>(m, "MirageError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def(
      "diversity",
      [](const std::string& gml_path) {
        const auto parsed = load_gml_file(gml_path);
        auto r = diversity_report(parsed.topology);
        py::dict d;
        d["switches"] = r.switch_count;
        d["components"] = r.components;
        d["pairs"] = r.pair_count;
        d["pairs_with_alternates"] = r.pairs_with_alternates;
        d["percentage"] = r.percentage;
        return d;
      },
      py::arg("gml_path"), "Share of switch pairs joined by two or more simple paths.");

  m.def(
      "run_scenario",
      [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out_dir) {
        const Scenario sc = load(path, seed);
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run_scenario(sc);
          if (out_dir) write_outputs(sc, out, *out_dir);
        }
        return to_python(summary_json(sc, out));
      },
      py::arg("path"), py::arg("seed") = py::none(), py::arg("out_dir") = py::none(),
      "Runs a scenario file and returns its summary.");

  m.def(
      "config_hash", [](const std::string& path) { return load_scenario(path).config_hash; }, py::arg("path"));

  m.def(
      "metrics_from_counts",
      [](int tp, int fp, int fn, int tn) { return metrics_dict(metrics_from_counts(tp, fp, fn, tn)); },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

  m.def(
      "detection_report",
      [](int tp, int fp, int fn, int tn) { return detection_report(metrics_from_counts(tp, fp, fn, tn)); },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
}
