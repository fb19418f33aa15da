#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "lapkit/lap.hpp"
#include "lapkit/random.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

namespace {

// L = 8 pi puts xi = 1 on the dual lattice, so lambda = 1 hits the discrete spectrum.
const GridSpec kFree = GridSpec::make(1, 8.0 * std::numbers::pi, 512);

double exact_free_norm(const GridSpec& g, double lambda, double eta) {
  double dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.N; ++k) {
    const double xi = g.frequency(k);
    dist = std::min(dist, std::abs(Complex(xi * xi - lambda, eta)));
  }
  return 1.0 / dist;
}

WeightPair identity_weights(const GridSpec& g) { return realize_weights(g, {WeightKind::Identity, 0.0, {}}, {}); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("free resolvent norms equal the inverse distance to the discrete spectrum") {
  const Hamiltonian H = build_hamiltonian(kFree, zero_potential());
  const WeightPair w = identity_weights(kFree);
  for (auto [lambda, eta] : std::vector<std::pair<double, double>>{{-1.0, 0.1}, {1.0, 0.1}, {-5.0, 0.1}, {0.3, 0.01}}) {
    const ResolventNorm r = weighted_resolvent_norm(H, lambda, eta, w.left, w.right);
    CHECK(r.converged);
    CHECK(r.norm == doctest::Approx(exact_free_norm(kFree, lambda, eta)).epsilon(1e-8));
  }
  CHECK(weighted_resolvent_norm(H, 1.0, 0.1, w.left, w.right).norm == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(weighted_resolvent_norm(H, -1.0, 1e-4, w.left, w.right).norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("below the spectrum the free norm is flat in eta") {
  const Hamiltonian H = build_hamiltonian(kFree, zero_potential());
  SweepPlan plan;
  plan.lambdas = {-5.0};
  plan.weights = {WeightKind::Identity, 0.0, {}};
  const SweepResult r = run_sweep(H, plan, {});
  REQUIRE(r.rows.size() == 4);
  for (const SweepRow& row : r.rows) {
    CHECK(row.valid);
    // xi = 0 is on the lattice, so the norm is 1/|5 + i eta| exactly.
    CHECK(row.norm == doctest::Approx(1.0 / std::sqrt(25.0 + row.eta * row.eta)).epsilon(1e-8));
    if (row.eta <= 1e-2) CHECK(std::abs(row.norm - 0.2) <= 1e-6);
  }
  CHECK(r.verdict == Verdict::Pass);
  CHECK(r.trends[0].verdict == "bounded");
}

TEST_CASE("adjoint-first and direct norms agree for Hermitian weights") {
  const PotentialSpec v = potential_from_json({{"kind", "gaussian"}, {"amplitude", 0.5}});
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  const Hamiltonian H = build_hamiltonian(g, v);
  const WeightPair w = realize_weights(g, {WeightKind::Dilation, 0.0, {}}, {});
  const double a = weighted_resolvent_norm(H, 0.4, 0.05, w.left, w.right).norm;
  const double b = weighted_resolvent_norm(H, 0.4, 0.05, w.left, w.right, {}, {}, true).norm;
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("accepted solves satisfy the resolvent identity") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  const PotentialSpec v = potential_from_json(
      {{"kind", "gaussian"}, {"amplitude", -0.5}, {"imaginary", {{"kind", "gaussian"}, {"amplitude", 0.1}}}});
  const Hamiltonian H = build_hamiltonian(g, v);
  const LinearMap full = H.full();
  const double lambda = 0.3, eta = 1e-3;
  const ApplyOp shifted = [&](const Vector& in, Vector& out) {
    out = full(in);
    out -= Complex(lambda, -eta) * in;
  };
  Rng rng(5);
  const Vector f = random_vector(g.size(), rng);
  SolverSettings s;
  s.tol = 1e-8;
  // free resolvent as preconditioner, as the sweeps use it
  const LinearMap free = momentum_multiplier(g, "(p^2 - z)^-1", [&](std::span<const double> xi) {
    return 1.0 / Complex(xi[0] * xi[0] - lambda, eta);
  });
  const ApplyOp precond = [&](const Vector& in, Vector& out) { out = free(in); };
  const SolveResult r = gmres(shifted, precond, f, s);
  REQUIRE(r.converged);
  Vector check;
  shifted(r.x, check);
  CHECK((check - f).norm() <= 1e-8 * f.norm() * (1 + 1e-6));
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("sweep plans are validated") {
  SweepPlan p;
  p.lambdas = {0.0};
  CHECK_NOTHROW(p.validate());
  p.etas = {1e-2, 1e-1};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.etas = {1e-1, -1e-2};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.etas = {1e-1, 1e-2};
  p.threshold = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.threshold = 3.0;
  p.lambdas = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("sweep plans round trip through json") {
  SweepPlan p;
  p.lambdas = {-1.0, 0.0, 0.25};
  p.weights = {WeightKind::Partial, 0.5, {0, 2}};
  p.threshold = 4.0;
  nlohmann::json j = p;
  CHECK(j.at("weights").at("coords") == nlohmann::json::array({1, 3}));
  const SweepPlan back = j.get<SweepPlan>();
  CHECK(back.lambdas == p.lambdas);
  CHECK(back.etas == p.etas);
  CHECK(back.weights.coords == p.weights.coords);
  CHECK(back.threshold == 4.0);
  CHECK(nlohmann::json(back) == j);
}

TEST_CASE("blow-up classification from synthetic rows") {
  SweepResult r;
  const std::vector<double> etas{1e-1, 1e-2};
  r.rows = {{0.0, 1e-1, 1.0, 5, 1e-9, true},
            {0.0, 1e-2, 1.2, 5, 1e-9, true},
            {1.0, 1e-1, 1.0, 5, 1e-9, true},
            {1.0, 1e-2, 10.0, 5, 1e-9, true}};
  assign_verdicts(r, 3.0, etas);
  REQUIRE(r.trends.size() == 2);
  CHECK(r.trends[0].verdict == "bounded");
  CHECK(r.trends[0].ratio == doctest::Approx(1.2));
  CHECK(r.trends[1].verdict == "blow-up");
  CHECK(r.verdict == Verdict::Fail);
  CHECK(r.blow_up_lambdas == std::vector<double>{1.0});
  CHECK(r.global_sup == doctest::Approx(10.0));

  r.rows[1].valid = false;
  r.rows[3].norm = 1.1;
  assign_verdicts(r, 3.0, etas);
  CHECK(r.trends[0].verdict == "invalid");
  CHECK(std::isnan(r.trends[0].ratio));
  CHECK(r.verdict == Verdict::Inconclusive);
  CHECK(r.invalid_lambdas == std::vector<double>{0.0});
}

TEST_CASE("sweeps do not depend on the worker count") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  const Hamiltonian H = build_hamiltonian(g, potential_from_json({{"kind", "gaussian"}, {"amplitude", 0.3}}));
  SweepPlan plan;
  plan.lambdas = {-0.5, 0.0, 0.5, 1.0, 2.0};
  plan.etas = {1e-1, 1e-2};
  const SweepResult one = run_sweep(H, plan, {});
  plan.threads = 3;
  const SweepResult three = run_sweep(H, plan, {});
  CHECK(nlohmann::json(one) == nlohmann::json(three));
}

TEST_CASE("csv outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "lapkit_test_csv";
  std::filesystem::create_directories(dir);
  SweepResult empty;
  write_sweep_csv(empty, dir / "sweep.csv");
  CHECK(slurp(dir / "sweep.csv") == "lambda,eta,norm,iters,residual,valid\n");
  write_sup_csv(empty, dir / "sup_per_lambda.csv");
  CHECK(slurp(dir / "sup_per_lambda.csv") == "lambda,sup_norm,ratio,verdict\n");

  SweepResult one;
  one.rows = {{0.5, 0.1, 1.0 / 3.0, 7, 1e-9, true}};
  write_sweep_csv(one, dir / "sweep.csv");
  CHECK(slurp(dir / "sweep.csv") ==
        "lambda,eta,norm,iters,residual,valid\n0.5,0.10000000000000001,0.33333333333333331,7,1.0000000000000001e-09,1\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep results round trip through json") {
  const GridSpec g = GridSpec::make(1, 20.0, 128);
  const Hamiltonian H = build_hamiltonian(g, zero_potential());
  SweepPlan plan;
  plan.lambdas = {-1.0, 0.5};
  plan.etas = {1e-1, 1e-2};
  const SweepResult r = run_sweep(H, plan, {});
  nlohmann::json j = r;
  CHECK(nlohmann::json(j.get<SweepResult>()) == j);
}

TEST_CASE("weights are checked against the conjugate") {
  ConjugateSpec dil;
  ConjugateSpec decay;
  decay.kind = ConjugateKind::PositionDecay;
  decay.mu = 0.5;
  CHECK_THROWS_AS(realize_weights(kFree, {WeightKind::SInverseSqrt, 0.0, {}}, decay), std::invalid_argument);
  const WeightPair s = realize_weights(kFree, {WeightKind::SInverseSqrt, 0.0, {}}, dil);
  CHECK(s.left.is_hermitian());
  CHECK_THROWS_AS(weight_kind_from_string("none"), std::invalid_argument);
}

TEST_CASE("free eigenvalues are non-negative") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  const EigenScan s = lowest_eigenvalues(build_hamiltonian(g, zero_potential()), 4);
  CHECK(s.converged);
  REQUIRE(s.pairs.size() == 4);
  for (const EigenPair& p : s.pairs) {
    CHECK(p.value.real() >= -1e-10);
    CHECK_FALSE(p.bound_state);
  }
  CHECK_FALSE(s.has_bound_state_in(-10.0, 10.0));
  CHECK_THROWS_AS(lowest_eigenvalues(build_hamiltonian(g, zero_potential()), 0), std::invalid_argument);
}

TEST_CASE("Simon dichotomy matches a dense eigensolve") {
  for (double amplitude : {-0.1, 0.1}) {
    const GridSpec g = GridSpec::make(1, 20.0, 256);
    const Hamiltonian H =
        build_hamiltonian(g, potential_from_json({{"kind", "gaussian"}, {"amplitude", amplitude}, {"width", 1.0}}));
    const EigenScan s = lowest_eigenvalues(H, 3);
    Eigen::SelfAdjointEigenSolver<Matrix> dense(assemble(H.full()), Eigen::EigenvaluesOnly);
    REQUIRE(s.converged);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.pairs[i].value.real() - dense.eigenvalues()[i]) <= 1e-6);
    if (amplitude < 0) {
      CHECK(s.pairs[0].value.real() < 0.0);
      CHECK(s.pairs[0].bound_state);
    } else {
      CHECK(s.pairs[0].value.real() >= -1e-10);
      CHECK_FALSE(s.has_bound_state_in(-10.0, 10.0));
    }
  }
}

TEST_CASE("eigen scans round trip through json") {
  const GridSpec g = GridSpec::make(1, 20.0, 128);
  const EigenScan s = lowest_eigenvalues(build_hamiltonian(g, zero_potential()), 2);
  nlohmann::json j = s;
  CHECK(nlohmann::json(j.get<EigenScan>()) == j);
}
