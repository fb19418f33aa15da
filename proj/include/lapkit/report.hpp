#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lapkit/conditions.hpp"
#include "lapkit/conjugate.hpp"
#include "lapkit/lap.hpp"
#include "lapkit/mourre.hpp"

namespace lapkit {

inline constexpr const char* kVersion = "0.1.0";

/// S for the Mourre certificate. laplacian: (2 - c1)Δ. position-decay:
/// 2(1 - mu (1 + n/(n-2))^2) <q>^{-mu/2} Δ <q>^{-mu/2} (n >= 3).
/// momentum-decay: 2Δ lambda(p). auto picks by conjugate kind. The result
/// is multiplied by scale.
struct MourreChoice {
  bool enabled = true;
  double c1 = 0.0;
  std::string s_kind = "auto";
  double scale = 1.0;
  int probes = 64;
  bool estimate_constants = true;
};

struct CommutatorChoice {
  bool enabled = true;
  int probes = 8;
  std::vector<int> orders{1, 2};
  double tolerance = 1e-4;
};

struct EigenChoice {
  bool enabled = true;
  int count = 6;
};

struct SweepChoice {
  bool enabled = true;
  SweepPlan plan;
  /// Add the real parts of bound states found by the scan to the lambda grid.
  bool append_bound_states = true;
};

struct RunConfig {
  std::string name = "run";
  GridSpec grid;
  nlohmann::json potential = {{"kind", "zero"}};
  ConjugateSpec conjugate;
  std::vector<TheoremId> theorems;
  int k_split = 0;
  CommutatorChoice commutators;
  MourreChoice mourre;
  EigenChoice eigs;
  SweepChoice sweep;
  std::uint64_t seed = 0x5EED;
  int threads = 1;

  /// Cross-field checks; throws std::invalid_argument naming the field.
  void validate() const;
};

/// Unknown fields are rejected; messages carry the field path.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
/// Parse errors report line and column.
RunConfig load_config(const std::filesystem::path& path);

LinearMap mourre_s_operator(const GridSpec& grid, const ConjugateSpec& conjugate, const MourreChoice& choice);

struct CommutatorCheck {
  std::string tag;
  int order = 1;
  std::vector<std::string> identities;
  double deviation = 0.0;
  double tolerance = 1e-4;
  /// "pass", "fail" or "skipped" (no closed form); skipped checks do not
  /// enter the overall verdict.
  std::string status = "skipped";
  std::string note;
};

enum class Stage { Checks, Commutators, Mourre, Eigs, Sweep };

/// Which stages a subcommand runs.
struct StageSet {
  bool checks = false, commutators = false, mourre = false, eigs = false, sweep = false;
  static StageSet all() { return {true, true, true, true, true}; }
  static StageSet for_command(const std::string& command);
};

struct Report {
  RunConfig config;
  std::string command = "run";
  std::optional<std::vector<TheoremVerdict>> hypothesis_checks;
  std::optional<CouplingScan> coupling;
  std::optional<std::vector<CommutatorCheck>> commutator_checks;
  std::optional<MourreCertificate> mourre_certificate;
  std::optional<EigenScan> eigenvalues;
  /// pass: no bound state in the swept lambda range (or anywhere without a sweep).
  Verdict eigen_verdict = Verdict::Inconclusive;
  std::optional<SweepResult> lap_sweep;
  std::vector<std::string> annotations;
  Verdict verdict = Verdict::Inconclusive;
  /// Deterministic work counters per stage (solver iterations, subspace sizes).
  std::map<std::string, double> work;
  /// Wall-clock seconds per stage; written to timings.json, not the report,
  /// so the report stays byte-identical across runs.
  std::map<std::string, double> seconds;
};

/// Runs the stages in order checks, commutators, mourre, eigs, sweep; a stage
/// that throws is annotated and counted inconclusive.
Report run_pipeline(const RunConfig& config, const StageSet& stages, const std::string& command = "run");

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

/// Pretty JSON with keys in sorted order and doubles at 17 significant digits.
std::string dump_json(const nlohmann::json& j);

/// report.json, sweep.csv, sup_per_lambda.csv and timings.json in dir
/// (created if missing); plot.gp as well when gnuplot is set.
void emit_report(const Report& r, const std::filesystem::path& dir, bool gnuplot = false);

/// 0 all pass, 2 any fail, 3 inconclusive present (and no fail).
int exit_code(Verdict v);

}  // namespace lapkit
