#include <doctest.h>

#include <cmath>

#include "lapkit/commutators.hpp"
#include "lapkit/random.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

namespace {

const GridSpec kLine = GridSpec::make(1, 20.0, 512);

ConjugateSpec spec(ConjugateKind kind, double mu) {
  ConjugateSpec s;
  s.kind = kind;
  s.mu = mu;
  return s;
}

ScalarField quartic_decay(double amplitude) {
  return ScalarField::radial(
      "<x>^-4", [amplitude](double r) { return Complex(amplitude * std::pow(1 + r * r, -2)); },
      [amplitude](double r) { return Complex(-4 * amplitude * r * std::pow(1 + r * r, -3)); },
      [amplitude](double r) {
        return Complex(amplitude * (-4 * std::pow(1 + r * r, -3) + 24 * r * r * std::pow(1 + r * r, -4)));
      });
}

CommutatorParts kinetic() {
  CommutatorParts p;
  p.laplacian = true;
  return p;
}

CommutatorParts potential_only(ScalarField v) {
  CommutatorParts p;
  p.potential = std::move(v);
  return p;
}

double deviation_on(const LinearMap& D, const LinearMap& A, const std::vector<Vector>& states) {
  double worst = 0.0;
  for (const Vector& f : states) {
    const Vector d = D(f), a = A(f);
    worst = std::max(worst, (d - a).norm() / std::max({d.norm(), a.norm(), 1e-300}));
  }
  return worst;
}

}  // namespace

TEST_CASE("self-commutation vanishes") {
  const LinearMap D = laplacian(kLine);
  const LinearMap C = discrete_commutator(D, D, 1);
  Rng rng(1);
  const Vector f = band_limited_random(kLine, rng);
  CHECK(C(f).norm() <= 1e-12 * D(D(f)).norm());
}

TEST_CASE("position and momentum form a canonical pair on interior band-limited states") {
  // [q, ip] = i(qp - pq) = i * i = -1 with p = -i d/dx.
  const LinearMap C = discrete_commutator(coordinate(kLine, 0), momentum(kLine, 0), 1);
  Rng rng(2);
  for (int i = 0; i < 4; ++i) {
    const Vector f = band_limited_random(kLine, rng);
    CHECK((C(f) + f).norm() <= 1e-6 * f.norm());
  }
}

TEST_CASE("analytic commutator examples") {
  Rng rng(3);
  const Vector f = band_limited_random(kLine, rng);
  const Vector twice = 2.0 * laplacian(kLine)(f);
  std::vector<Identity> used;
  const LinearMap dil = analytic_commutator(kLine, kinetic(), spec(ConjugateKind::Dilation, 0.0), 1, &used);
  CHECK((dil(f) - twice).norm() <= 1e-12 * twice.norm());
  REQUIRE(used.size() == 1);
  CHECK(used[0] == Identity::LaplacianDilation);
  const LinearMap pd = analytic_commutator(kLine, kinetic(), spec(ConjugateKind::PositionDecay, 0.0), 1);
  CHECK((pd(f) - twice).norm() <= 1e-10 * twice.norm());

  const int k = 11;
  const double xi = kLine.frequency(k);
  Vector wave(static_cast<Eigen::Index>(kLine.size()));
  for (int j = 0; j < kLine.N; ++j) wave[j] = std::exp(Complex(0.0, xi * kLine.node(j)));
  const LinearMap mom = analytic_commutator(kLine, kinetic(), spec(ConjugateKind::MomentumDecay, 1.0), 1);
  const double factor = 2 * xi * xi / std::sqrt(1 + xi * xi);
  CHECK((mom(wave) - factor * wave).norm() <= 1e-10 * factor * wave.norm());
}

TEST_CASE("unsupported and incomplete requests are refused") {
  CHECK_THROWS_AS(analytic_commutator(kLine, potential_only(quartic_decay(1.0)), spec(ConjugateKind::MomentumDecay, 1.0),
                                      1),
                  NoClosedForm);
  ScalarField bare;
  bare.tag = "no derivatives";
  bare.value = [](std::span<const double> x) { return Complex(std::exp(-x[0] * x[0])); };
  CHECK_THROWS_AS(analytic_commutator(kLine, potential_only(bare), spec(ConjugateKind::Dilation, 0.0), 1),
                  std::invalid_argument);
}

TEST_CASE("every closed-form identity cross-validates against the discrete commutator") {
  const std::vector<Vector> states = probe_states(kLine, 16, 7);
  struct Case {
    CommutatorParts parts;
    ConjugateSpec conj;
    int order;
  };
  std::vector<Case> cases;
  for (int order : {1, 2}) {
    cases.push_back({kinetic(), spec(ConjugateKind::Dilation, 0.0), order});
    for (double mu : {0.0, 0.25, 1.0}) cases.push_back({kinetic(), spec(ConjugateKind::PositionDecay, mu), order});
    if (order == 1)
      for (double mu : {1.0, 1.5}) cases.push_back({kinetic(), spec(ConjugateKind::MomentumDecay, mu), order});
    cases.push_back({potential_only(quartic_decay(1.0)), spec(ConjugateKind::Dilation, 0.0), order});
    cases.push_back({potential_only(quartic_decay(1.0)), spec(ConjugateKind::PositionDecay, 0.25), order});
  }
  for (const Case& c : cases) {
    const CommutatorPair pair = commutator_pair(kLine, c.parts, c.conj, c.order);
    INFO(pair.tag(), " ", c.conj.tag());
    CHECK(cross_validate(pair, states) <= 1e-4);
  }
  const CommutatorPair free_pair = commutator_pair(kLine, kinetic(), spec(ConjugateKind::Dilation, 0.0), 1);
  CHECK(cross_validate(free_pair, states) <= 1e-6);
}

TEST_CASE("second-order momentum-decay identity on a wide box") {
  // <p>^-mu has a nonlocal kernel; multiplied by q twice it feels the periodic wrap unless the box is wide.
  const GridSpec wide = GridSpec::make(1, 40.0, 1024);
  const std::vector<Vector> states = probe_states(wide, 16, 7);
  for (double mu : {1.0, 1.5}) {
    const CommutatorPair pair = commutator_pair(wide, kinetic(), spec(ConjugateKind::MomentumDecay, mu), 2);
    INFO(mu);
    CHECK(cross_validate(pair, states) <= 1e-6);
  }
}

TEST_CASE("refining the grid reduces the position-decay deviation") {
  auto deviation = [](int N) {
    const GridSpec g = GridSpec::make(1, 20.0, N);
    std::vector<Vector> states;
    for (double c : {-1.0, 0.0, 1.5}) {
      const std::vector<double> cc{c}, k{0.5};
      states.push_back(masked_gaussian(g, cc, 0.6, k));
    }
    return cross_validate(commutator_pair(g, kinetic(), spec(ConjugateKind::PositionDecay, 0.25), 1), states);
  };
  CHECK(deviation(512) * 2.0 <= deviation(256));
}

TEST_CASE("a single state gives a finite deviation") {
  const std::vector<double> c{0.0}, k{0.0};
  const std::vector<Vector> one{masked_gaussian(kLine, c, 1.0, k)};
  const double d = cross_validate(commutator_pair(kLine, kinetic(), spec(ConjugateKind::Dilation, 0.0), 1), one);
  CHECK(std::isfinite(d));
}

TEST_CASE("discrete commutators of Hermitian maps are Hermitian") {
  const LinearMap T = laplacian(kLine) + position_multiplier(kLine, "V", [](std::span<const double> x) {
                        return Complex(std::exp(-x[0] * x[0]));
                      });
  for (const ConjugateSpec& s : {spec(ConjugateKind::Dilation, 0.0), spec(ConjugateKind::PositionDecay, 0.5),
                                 spec(ConjugateKind::MomentumDecay, 1.0)}) {
    const LinearMap A = build_conjugate(kLine, s);
    const LinearMap C = discrete_commutator(T, A, 1);
    CHECK(C.is_hermitian());
    CHECK(adjoint_defect(C, 3, 5) <= 1e-10 * estimate_norm(C, 10, 1).value);
  }
}

TEST_CASE("second order equals the first-order commutator applied twice") {
  const LinearMap T = laplacian(kLine);
  const LinearMap A = build_conjugate(kLine, spec(ConjugateKind::PositionDecay, 0.25));
  Rng rng(4);
  const Vector f = band_limited_random(kLine, rng);
  const Vector twice = discrete_commutator(discrete_commutator(T, A, 1), A, 1)(f);
  CHECK((discrete_commutator(T, A, 2)(f) - twice).norm() <= 1e-12 * twice.norm());
}

TEST_CASE("the 1-D position-decay commutator splits into 2pF'p plus W(q)") {
  const double mu = 0.5, a = 0.7;
  const ScalarField v = quartic_decay(a);
  CommutatorParts parts = kinetic();
  parts.potential = v;
  const LinearMap H = assemble_parts(kLine, parts);
  const LinearMap A = build_conjugate(kLine, spec(ConjugateKind::PositionDecay, mu));
  const LinearMap p = momentum(kLine, 0);
  const LinearMap Fp = position_multiplier(kLine, "F'", [mu](std::span<const double> x) {
    return Complex(f_derivatives(mu, x[0]).d1);
  });
  const LinearMap W = position_multiplier(kLine, "W", [mu, a](std::span<const double> x) {
    return Complex(w_profile(mu, [a](double t) { return -4 * a * t * std::pow(1 + t * t, -3); }, x[0]));
  });
  const LinearMap pieces = scale(2.0, compose(p, compose(Fp, p))) + W;
  CHECK(deviation_on(discrete_commutator(H, A, 1), pieces, probe_states(kLine, 12, 9)) <= 1e-4);
}

TEST_CASE("regularity probes") {
  const auto dilation = [](const GridSpec& g) { return build_conjugate(g, ConjugateSpec{}); };
  const RegularityTrend bounded = regularity_trend(
      kLine, [&](const GridSpec& g) { return std::make_pair(japanese_position(g, -2.0), dilation(g)); }, 2);
  CHECK_FALSE(bounded.growing[0]);
  CHECK_FALSE(bounded.growing[1]);
  CHECK(bounded.ratio[0] == doctest::Approx(1.0).epsilon(0.05));

  const RegularityTrend unbounded =
      regularity_trend(kLine, [&](const GridSpec& g) { return std::make_pair(laplacian(g), dilation(g)); }, 1);
  CHECK(unbounded.growing[0]);

  const RegularityTrend decay = regularity_trend(
      kLine,
      [](const GridSpec& g) {
        return std::make_pair(japanese_position(g, -3.0), build_conjugate(g, spec(ConjugateKind::MomentumDecay, 1.0)));
      },
      2);
  CHECK_FALSE(decay.growing[0]);
  CHECK_FALSE(decay.growing[1]);

  const std::vector<double> first = regularity_probe(japanese_position(kLine, -2.0), dilation(kLine), 1);
  CHECK(first == regularity_probe(japanese_position(kLine, -2.0), dilation(kLine), 1));
  CHECK_THROWS_AS(regularity_probe(laplacian(kLine), dilation(kLine), 4), std::invalid_argument);
}
