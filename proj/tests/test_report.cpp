#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lapkit/report.hpp"

using namespace lapkit;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config() {
  return nlohmann::json::parse(R"({
    "name": "small",
    "grid": {"n": 1, "L": 20.0, "N": 128},
    "potential": {"kind": "gaussian", "amplitude": 0.2},
    "conjugate": {"kind": "dilation"},
    "theorems": ["MR"],
    "mourre": {"S": {"kind": "laplacian", "scale": 0.5}, "probes": 24, "estimate_constants": false},
    "eigs": {"count": 2},
    "sweep": {"lambdas": [-0.5, 0.5], "etas": [0.1, 0.01], "weights": {"kind": "identity"}},
    "seed": 11
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("lapkit_report_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code(Verdict::Pass) == 0);
  CHECK(exit_code(Verdict::Fail) == 2);
  CHECK(exit_code(Verdict::Inconclusive) == 3);
}

TEST_CASE("stage selection per subcommand") {
  const StageSet check = StageSet::for_command("check");
  CHECK(check.checks);
  CHECK_FALSE(check.sweep);
  CHECK(StageSet::for_command("sweep").sweep);
  CHECK_FALSE(StageSet::for_command("sweep").mourre);
  CHECK(StageSet::for_command("eigs").eigs);
  CHECK(StageSet::for_command("mourre").mourre);
  const StageSet run = StageSet::for_command("run");
  CHECK((run.checks && run.commutators && run.mourre && run.eigs && run.sweep));
  CHECK_THROWS_AS(StageSet::for_command("plot"), std::invalid_argument);
}

TEST_CASE("config errors carry the field path") {
  nlohmann::json j = small_config();
  j["colour"] = "blue";
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("unknown field 'colour'"), std::invalid_argument);

  j = small_config();
  j["grid"]["N"] = 100;
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.grid"), std::invalid_argument);

  j = small_config();
  j["sweep"]["etas"] = {0.01, 0.1};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.sweep"), std::invalid_argument);

  j = small_config();
  j["sweep"]["weights"] = {{"kind", "momentum-decay"}, {"mu", 1.0}};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.sweep.weights"), std::invalid_argument);

  j = small_config();
  j["mourre"]["c1"] = 0.5;
  j["conjugate"] = {{"kind", "momentum-decay"}, {"mu", 1.0}};
  j["sweep"]["weights"] = {{"kind", "identity"}};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.mourre.c1"), std::invalid_argument);

  j = small_config();
  j["eigs"]["count"] = 50;
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.eigs.count"), std::invalid_argument);

  j = small_config();
  j.erase("grid");
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.grid"), std::invalid_argument);

  j = small_config();
  j["theorems"] = {"NOPE"};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("config.theorems"), std::invalid_argument);
}

TEST_CASE("malformed config files report line and column") {
  const fs::path dir = scratch("bad_config");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\n  \"name\": \"x\",\n  \"grid\": {\"n\": 1,,}\n}\n";
  CHECK_THROWS_WITH_AS(load_config(dir / "bad.json"), doctest::Contains("line 3"), std::invalid_argument);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("config echo is enough to re-run") {
  const RunConfig c = config_from_json(small_config());
  const nlohmann::json echo = config_to_json(c);
  CHECK(config_to_json(config_from_json(echo)) == echo);
}

TEST_CASE("bundled configs parse") {
  for (const char* name : {"free_dilation", "osc_beta3_au", "violation_well"}) {
    const RunConfig c = load_config(fs::path(LAPKIT_SOURCE_DIR) / "configs" / (std::string(name) + ".json"));
    CHECK(c.name == name);
  }
}

TEST_CASE("json dump is sorted, 17-digit and null for non-finite values") {
  const nlohmann::json j = {{"b", 0.1}, {"a", 1}, {"c", std::numeric_limits<double>::infinity()}};
  const std::string text = dump_json(j);
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
}

TEST_CASE("mourre S operators") {
  const GridSpec g = GridSpec::make(3, 20.0, 256, Geometry::Radial);
  ConjugateSpec c;
  MourreChoice m;
  m.s_kind = "laplacian";
  m.c1 = 0.5;
  CHECK(mourre_s_operator(g, c, m).is_hermitian());
  m.s_kind = "position-decay";
  c.kind = ConjugateKind::PositionDecay;
  c.mu = 1.0 / 32;
  CHECK(mourre_s_operator(g, c, m).is_hermitian());
  CHECK_THROWS_AS(mourre_s_operator(GridSpec::make(1, 20.0, 128), c, m), std::invalid_argument);
}

TEST_CASE("pipeline report round trips and is deterministic") {
  const RunConfig c = config_from_json(small_config());
  const Report r = run_pipeline(c, StageSet::all());
  CHECK(r.hypothesis_checks.has_value());
  CHECK(r.commutator_checks.has_value());
  CHECK(r.mourre_certificate.has_value());
  CHECK(r.eigenvalues.has_value());
  CHECK(r.lap_sweep.has_value());
  CHECK(r.lap_sweep->verdict == Verdict::Pass);

  const nlohmann::json j = report_to_json(r);
  CHECK(j.at("exit_code").get<int>() == exit_code(r.verdict));
  CHECK(report_to_json(report_from_json(j)) == j);

  const fs::path a = scratch("det_a"), b = scratch("det_b");
  emit_report(r, a, true);
  emit_report(run_pipeline(c, StageSet::all()), b);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  for (const char* f : {"report.json", "sweep.csv", "sup_per_lambda.csv", "timings.json", "plot.gp"})
    CHECK(fs::exists(a / f));
  CHECK_FALSE(fs::exists(b / "plot.gp"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep-only runs omit the other stages") {
  const RunConfig c = config_from_json(small_config());
  const Report r = run_pipeline(c, StageSet::for_command("sweep"), "sweep");
  CHECK_FALSE(r.hypothesis_checks.has_value());
  CHECK_FALSE(r.mourre_certificate.has_value());
  CHECK(r.lap_sweep.has_value());
  CHECK(report_to_json(r).at("command") == "sweep");
}

TEST_CASE("a run without a sweep writes a header-only sweep csv") {
  nlohmann::json j = small_config();
  j["sweep"]["enabled"] = false;
  const Report r = run_pipeline(config_from_json(j), StageSet::for_command("eigs"), "eigs");
  const fs::path d = scratch("empty_sweep");
  emit_report(r, d);
  CHECK(slurp(d / "sweep.csv") == "lambda,eta,norm,iters,residual,valid\n");
  fs::remove_all(d);
}

TEST_CASE("a failing stage is annotated, not fatal") {
  nlohmann::json j = small_config();
  j["mourre"]["S"]["kind"] = "position-decay";
  const Report r = run_pipeline(config_from_json(j), StageSet::for_command("mourre"), "mourre");
  CHECK_FALSE(r.annotations.empty());
  CHECK(r.verdict == Verdict::Inconclusive);
}
