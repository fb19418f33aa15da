#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <optional>

#include "lapkit/conditions.hpp"
#include "lapkit/hs_calculus.hpp"
#include "lapkit/report.hpp"
#include "lapkit/verdict.hpp"

namespace py = pybind11;
using lapkit::RunConfig;
using nlohmann::json;

// JSON crosses the boundary as text; the Python side owns the dict conversion.
namespace {

RunConfig configure(const std::string& config_json, std::optional<std::uint64_t> seed, std::optional<int> threads) {
  RunConfig cfg = lapkit::config_from_json(json::parse(config_json));
  if (seed) cfg.seed = *seed;
  if (threads) {
    cfg.threads = *threads;
    cfg.sweep.plan.threads = *threads;
  }
  return cfg;
}

lapkit::Report pipeline(const RunConfig& cfg, const std::string& command) {
  py::gil_scoped_release release;
  return lapkit::run_pipeline(cfg, lapkit::StageSet::for_command(command), command);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lapkit native core";
  py::register_exception<nlohmann::json::exception>(m, "JsonError", PyExc_ValueError);

  m.def("load_config", [](const std::string& path) {
    return lapkit::config_to_json(lapkit::load_config(path)).dump();
  });
  m.def("normalize_config", [](const std::string& config_json) {
    return lapkit::config_to_json(lapkit::config_from_json(json::parse(config_json))).dump();
  });
  m.def(
      "run",
      [](const std::string& config_json, const std::string& command, std::optional<std::uint64_t> seed,
         std::optional<int> threads) {
        return lapkit::dump_json(lapkit::report_to_json(pipeline(configure(config_json, seed, threads), command)));
      },
      py::arg("config_json"), py::arg("command") = "run", py::arg("seed") = py::none(),
      py::arg("threads") = py::none());
  m.def(
      "emit",
      [](const std::string& config_json, const std::string& out_dir, const std::string& command,
         std::optional<std::uint64_t> seed, std::optional<int> threads, bool gnuplot) {
        const lapkit::Report r = pipeline(configure(config_json, seed, threads), command);
        lapkit::emit_report(r, std::filesystem::path(out_dir), gnuplot);
        return lapkit::exit_code(r.verdict);
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("command") = "run", py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("gnuplot") = false);
  m.def("hs_demo", [](const std::string& config_json) {
    const lapkit::HsDemoConfig c = lapkit::hs_demo_config_from_json(json::parse(config_json));
    py::gil_scoped_release release;
    return lapkit::dump_json(lapkit::run_hs_demo(c));
  });
  m.def(
      "classify_oscillating",
      [](double w, double k, double alpha, double beta, int n) {
        const lapkit::OscillatingPotential p{w, k, alpha, beta};
        return json(lapkit::classify_oscillating(p, n)).dump();
      },
      py::arg("w"), py::arg("k"), py::arg("alpha"), py::arg("beta"), py::arg("n") = 3);
  m.def("exit_code", [](const std::string& verdict) {
    return lapkit::exit_code(lapkit::verdict_from_string(verdict));
  });
}
