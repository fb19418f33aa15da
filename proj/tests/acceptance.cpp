// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "lapkit/commutators.hpp"
#include "lapkit/conditions.hpp"
#include "lapkit/hs_calculus.hpp"
#include "lapkit/lap.hpp"
#include "lapkit/mourre.hpp"
#include "lapkit/report.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ConjugateSpec conj(ConjugateKind kind, double mu) {
  ConjugateSpec s;
  s.kind = kind;
  s.mu = mu;
  return s;
}

Outcome commutator_suite() {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  const std::vector<Vector> states = probe_states(g, 16, 0x5EED);
  CommutatorParts lap;
  lap.laplacian = true;
  CommutatorParts pot;
  pot.potential = ScalarField::radial(
      "<x>^-4", [](double r) { return Complex(std::pow(1 + r * r, -2)); },
      [](double r) { return Complex(-4 * r * std::pow(1 + r * r, -3)); },
      [](double r) { return Complex(-4 * std::pow(1 + r * r, -3) + 24 * r * r * std::pow(1 + r * r, -4)); });
  std::vector<std::pair<CommutatorParts, std::pair<ConjugateSpec, int>>> cases{
      {lap, {conj(ConjugateKind::Dilation, 0.0), 1}},
      {lap, {conj(ConjugateKind::PositionDecay, 0.0), 1}},
      {lap, {conj(ConjugateKind::PositionDecay, 0.25), 1}},
      {lap, {conj(ConjugateKind::PositionDecay, 1.0), 1}},
      {pot, {conj(ConjugateKind::Dilation, 0.0), 1}},
      {lap, {conj(ConjugateKind::MomentumDecay, 1.0), 1}},
      {lap, {conj(ConjugateKind::MomentumDecay, 1.5), 1}},
      {lap, {conj(ConjugateKind::Dilation, 0.0), 2}},
      {pot, {conj(ConjugateKind::Dilation, 0.0), 2}},
  };
  double worst = 0.0;
  for (const auto& [parts, sc] : cases)
    worst = std::max(worst, cross_validate(commutator_pair(g, parts, sc.first, sc.second), states));
  return {worst <= 1e-4, std::to_string(cases.size()) + " identities, max deviation " + fmt("%.2e", worst) +
                             " (tol 1e-4)"};
}

Outcome free_mourre() {
  const GridSpec g = GridSpec::make(3, 20.0, 512, Geometry::Radial);
  const std::vector<Vector> sub = test_subspace(g, 64, 0x5EED);
  const Hamiltonian H = build_hamiltonian(g, zero_potential());
  const LinearMap D = laplacian(g);
  const LinearMap AD = build_conjugate(g, conj(ConjugateKind::Dilation, 0.0));
  MourreOptions quick;
  quick.estimate_constants = false;
  const double gap_d = verify_weak_mourre(H, AD, scale(2.0, D), 0.0, sub, quick).gap;
  const double mu = 1.0 / 32, f = 1.0 + 3.0 / (3.0 - 2.0);
  const LinearMap S = scale(2.0 * (1.0 - mu * f * f), sandwich(japanese_position(g, -mu / 2), D));
  const double gap_f =
      verify_weak_mourre(H, build_conjugate(g, conj(ConjugateKind::PositionDecay, mu)), S, 0.0, sub, quick).gap;
  const double C = estimate_second_order_C(D, AD, scale(2.0, D), sub).value();
  const bool ok = std::abs(gap_d) <= 1e-6 && gap_f >= -1e-6 && std::abs(C - 2.0) <= 1e-8;
  return {ok, "dilation gap " + fmt("%.2e", gap_d) + " position-decay gap " + fmt("%.2e", gap_f) + " C " +
                  fmt("%.12f", C)};
}

Outcome hardy_suite() {
  const GridSpec g = GridSpec::make(3, 20.0, 512, Geometry::Radial);
  Rng rng(0x5EED);
  double worst = -std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const HardyPair h = hardy_check(StateVector(g, band_limited_random(g, rng)));
    const double excess = (h.lhs - h.rhs) / h.rhs;
    worst = std::max(worst, excess);
    if (excess > 1e-8) ++violations;
  }
  return {violations == 0, "100 states, " + std::to_string(violations) + " violations, max (lhs-rhs)/rhs " +
                               fmt("%.3f", worst)};
}

Outcome lap_trend() {
  const GridSpec g = GridSpec::make(3, 40.0, 1024, Geometry::Radial);
  OscillatingPotential w{0.01, 1.0, 2.0, 3.0};
  const Hamiltonian H = build_hamiltonian(g, oscillating_potential(w));
  const ConjugateSpec cs = conj(ConjugateKind::MomentumDecay, 1.5);
  SweepPlan plan;
  for (int j = 0; j < 16; ++j) plan.lambdas.push_back(-1.0 + j / 3.0);
  plan.lambdas.push_back(0.05);
  plan.weights = {WeightKind::MomentumDecay, 1.5, {}};
  plan.threads = 4;
  const SweepResult r = run_sweep(H, plan, cs);
  double worst = 0.0;
  for (const LambdaTrend& t : r.trends) worst = std::max(worst, t.ratio);
  const EigenScan scan = lowest_eigenvalues(H, 8);
  const bool none = !scan.has_bound_state_in(-1.0, 4.0);

  const GridSpec line = GridSpec::make(1, 20.0, 512);
  const Hamiltonian well = build_hamiltonian(line, potential_from_json({{"kind", "well"}, {"depth", 5.0}, {"radius", 1.0}}));
  const EigenScan ws = lowest_eigenvalues(well, 1);
  SweepPlan control;
  control.lambdas = {ws.pairs.at(0).value.real()};
  control.weights = {WeightKind::PositionDecay, 0.5, {}};
  const SweepResult cr = run_sweep(well, control, conj(ConjugateKind::PositionDecay, 0.5));
  const double control_ratio = cr.trends.at(0).ratio;

  const bool ok = r.verdict == Verdict::Pass && r.trends.size() == 17 && worst <= 3.0 && none &&
                  ws.pairs.at(0).bound_state && control_ratio > 3.0;
  return {ok, "17 lambdas, max r " + fmt("%.3f", worst) + (none ? ", no bound state" : ", bound state found") +
                  "; well eigenvalue " + fmt("%.6f", ws.pairs.at(0).value.real()) + " r " +
                  fmt("%.2f", control_ratio)};
}

Outcome simon() {
  bool ok = true;
  std::ostringstream os;
  for (double a : {-0.1, 0.1}) {
    const nlohmann::json v = {{"kind", "gaussian"}, {"amplitude", a}, {"width", 1.0}};
    const GridSpec fine = GridSpec::make(1, 20.0, 512), coarse = GridSpec::make(1, 20.0, 256);
    const EigenScan s = lowest_eigenvalues(build_hamiltonian(fine, potential_from_json(v)), 1);
    Eigen::SelfAdjointEigenSolver<Matrix> dense(assemble(build_hamiltonian(coarse, potential_from_json(v)).full()),
                                                Eigen::EigenvaluesOnly);
    const double e = s.pairs.at(0).value.real(), oracle = dense.eigenvalues()[0];
    const bool sign_ok = a < 0 ? (e < 0 && s.pairs[0].bound_state) : e >= -1e-10;
    ok = ok && s.converged && sign_ok && std::abs(e - oracle) <= 1e-6;
    os << (a < 0 ? "attractive " : "repulsive ") << fmt("%.10f", e) << " vs dense " << fmt("%.10f", oracle) << "; ";
  }
  return {ok, os.str()};
}

Outcome classifier() {
  auto arith = [](const TheoremVerdict& v, const std::string& g) {
    for (const HypothesisLine& l : v.lines)
      if (l.group == g && !l.delegated && l.verdict != Verdict::Pass) return false;
    return true;
  };
  const TheoremVerdict a = classify_oscillating({0.01, 1.0, 1.0, 4.0}, 3);
  const TheoremVerdict b = classify_oscillating({0.01, 1.0, 2.0, 4.0}, 3);
  const TheoremVerdict c = classify_oscillating({0.01, 1.0, 9.0, 3.0}, 3);
  bool ok = arith(a, "BoGo") && !arith(b, "BoGo") && arith(b, "AF2") && !arith(c, "BoGo") && !arith(c, "AF2") &&
            arith(c, "AU");
  Rng rng(0x5EED);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double al = rng.uniform(0.0, 10.0), be = rng.uniform(0.0, 10.0);
    const TheoremVerdict v = classify_oscillating({0.01, 1.0, al, be}, 3);
    const bool bogo = arith(v, "BoGo"), af2 = arith(v, "AF2");
    if (bogo != (be >= 2 && be - 2 * al >= 2) || af2 != (be >= 2 && be - al >= 2) || (bogo && !af2)) ++mismatches;
  }
  ok = ok && mismatches == 0;
  return {ok, "examples (1,4) (2,4) (9,3) as stated; 1000 pairs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome helffer_sjostrand() {
  const AlmostAnalyticExtension ext = build_extension(japanese_symbol(-1.0));
  double closure = 0.0, apply_err = 0.0, doubling = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed : {1, 2, 3}) {
    const Matrix B = random_hermitian(40, 3.0, seed), T = random_hermitian(40, 1.0, seed + 100);
    closure = std::max(closure, hs_commutator_expansion(ext, B, T, 2).closure_error);
    const Matrix exact = functional_calculus(ext.phi, B);
    apply_err = std::max(apply_err, operator_norm(hs_apply(ext, B) - exact) / operator_norm(exact));
  }
  doubling = quadrature_doubling_ratio(ext, random_hermitian(40, 3.0, 1), {});
  bool refused = false;
  try {
    check_weight_admissible(-1.0, 2, 2.5, 0.4);
  } catch (const std::invalid_argument&) {
    refused = true;
  }
  const bool ok = closure <= 1e-6 && apply_err <= 1e-6 && doubling >= 2.0 && refused;
  return {ok, "closure " + fmt("%.2e", closure) + " apply " + fmt("%.2e", apply_err) + " doubling " +
                  fmt("%.1f", doubling) + (refused ? ", s=2.5 refused" : ", s=2.5 accepted")};
}

Outcome determinism() {
  int identical = 0;
  const char* names[] = {"free_dilation", "osc_beta3_au", "violation_well"};
  for (const char* name : names) {
    const RunConfig c = load_config(std::filesystem::path(LAPKIT_SOURCE_DIR) / "configs" / (std::string(name) + ".json"));
    const std::string a = dump_json(report_to_json(run_pipeline(c, StageSet::all())));
    const std::string b = dump_json(report_to_json(run_pipeline(c, StageSet::all())));
    if (a == b) ++identical;
  }
  return {identical == 3, std::to_string(identical) + "/3 bundled configs byte-identical across two runs"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria{
      {"commutator identities", commutator_suite, 60.0},
      {"free Mourre equalities", free_mourre, none},
      {"Hardy inequality", hardy_suite, none},
      {"LAP trend at the threshold", lap_trend, 600.0},
      {"1-D negative eigenvalue dichotomy", simon, none},
      {"oscillating-family classifier", classifier, none},
      {"Helffer-Sjostrand calculus", helffer_sjostrand, none},
      {"determinism", determinism, none},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_seconds) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", criteria[i].budget_seconds) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu %-34s %s  %s [%.1f s]\n", i + 1, criteria[i].name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
