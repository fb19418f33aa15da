#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lapkit/operators.hpp"
#include "lapkit/random.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

namespace {

double rayleigh(const LinearMap& T, const Vector& f) {
  const GridSpec& g = T.grid();
  return inner(g, f, T(f)).real() / inner(g, f, f).real();
}

Vector point_mass(const GridSpec& g, int node, Complex amplitude) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(g.size()));
  v[node] = amplitude;
  return v;
}

}  // namespace

TEST_CASE("laplacian is Hermitian and positive semidefinite") {
  for (const GridSpec& g : {GridSpec::make(1, 20.0, 512), GridSpec::make(3, 20.0, 512, Geometry::Radial),
                            GridSpec::make(5, 20.0, 256, Geometry::Radial), GridSpec::make(2, 10.0, 32)}) {
    const LinearMap D = laplacian(g);
    CHECK(D.is_hermitian());
    CHECK(adjoint_defect(D, 4, 1) <= 1e-10 * estimate_norm(D, 10, 1).value);
    Rng rng(42);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vector f = random_vector(g.size(), rng);
      project_symmetry(g, f);
      worst = std::min(worst, rayleigh(D, f));
    }
    CHECK(worst >= -1e-12);
  }
}

TEST_CASE("laplacian acts on plane waves by |xi|^2") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  const int k = 7;
  const double xi = g.frequency(k);
  Vector f(static_cast<Eigen::Index>(g.size()));
  for (int j = 0; j < g.N; ++j) f[j] = std::exp(Complex(0.0, xi * g.node(j)));
  CHECK((laplacian(g)(f) - xi * xi * f).norm() <= 1e-10 * f.norm());
}

TEST_CASE("weighted norm examples") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  Rng rng(1);
  const StateVector f(g, band_limited_random(g, rng));
  CHECK(weighted_norm(f, WeightSpec{}) == doctest::Approx(f.norm()).epsilon(1e-14));

  const int origin = g.N / 2;
  REQUIRE(g.node(origin) == 0.0);
  const StateVector delta(g, point_mass(g, origin, Complex(0.0, 3.0)));
  CHECK(weighted_norm(delta, WeightSpec{2.0, 0.0, false, {}}) == doctest::Approx(delta.norm()).epsilon(1e-14));
}

TEST_CASE("weighted norms behave as norms") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  Rng rng(8);
  for (const WeightSpec w : {WeightSpec{1.0, 1.0, false, {}}, WeightSpec{-0.5, 2.0, true, {}}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vector a = band_limited_random(g, rng), b = band_limited_random(g, rng);
      const double c = rng.uniform(-3.0, 3.0);
      const double na = weighted_norm(StateVector(g, a), w), nb = weighted_norm(StateVector(g, b), w);
      CHECK(std::isfinite(na));
      CHECK(na > 0.0);
      CHECK(weighted_norm(StateVector(g, c * a), w) == doctest::Approx(std::abs(c) * na).epsilon(1e-12));
      CHECK(weighted_norm(StateVector(g, a + b), w) <= na + nb + 1e-12 * (na + nb));
    }
  }
}

TEST_CASE("Hardy check examples") {
  const GridSpec g = GridSpec::make(3, 20.0, 512, Geometry::Radial);
  const HardyPair zero = hardy_check(StateVector(g, Vector::Zero(static_cast<Eigen::Index>(g.size()))));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);

  // u(r) = r exp(-r^2/2) (f = exp(-r^2/2)): lhs -> (1/4) int u^2/r^2 = sqrt(pi)/8,
  // rhs = int u'^2 = 3 sqrt(pi)/8 on the half line. eps0 = h/2 makes lhs converge at first order.
  const double sq = std::sqrt(std::numbers::pi);
  std::vector<double> deficit;
  for (int N : {512, 1024, 2048}) {
    const GridSpec gn = GridSpec::make(3, 20.0, N, Geometry::Radial);
    Vector u(static_cast<Eigen::Index>(gn.size()));
    for (int j = 0; j < gn.N; ++j) {
      const double r = gn.node(j);
      u[j] = r * std::exp(-r * r / 2.0);
    }
    project_symmetry(gn, u);
    const HardyPair h = hardy_check(StateVector(gn, u));
    CHECK(h.rhs == doctest::Approx(3.0 * sq / 8.0).epsilon(1e-10));
    CHECK(h.lhs < h.rhs);
    deficit.push_back(sq / 8.0 - h.lhs);
  }
  CHECK(deficit[0] > 0.0);
  CHECK(deficit[0] <= 0.1 * sq / 8.0);
  for (std::size_t i = 1; i < deficit.size(); ++i)
    CHECK(deficit[i - 1] / deficit[i] == doctest::Approx(2.0).epsilon(0.1));

  CHECK_THROWS_WITH_AS(hardy_check(StateVector(GridSpec::make(1, 20.0, 64),
                                               Vector::Ones(64))),
                       doctest::Contains("n >= 3"), std::invalid_argument);
}

TEST_CASE("Hardy inequality holds for masked random states in n = 3") {
  const GridSpec g = GridSpec::make(3, 20.0, 512, Geometry::Radial);
  Rng rng(0x5EED);
  for (int i = 0; i < 50; ++i) {
    const HardyPair h = hardy_check(StateVector(g, band_limited_random(g, rng)));
    CHECK(h.lhs <= h.rhs * (1.0 + 1e-8));
  }
}

TEST_CASE("multiplication test examples") {
  const GridSpec g = GridSpec::make(1, 20.0, 64);
  const LinearMap V = position_multiplier(g, "<q>^-2", [](std::span<const double> x) {
    return Complex(1.0 / (1.0 + x[0] * x[0]), 0.0);
  });
  CHECK(multiplication_test(V, 4));
  CHECK_FALSE(multiplication_test(laplacian(g), 4));
  CHECK_FALSE(multiplication_test(sandwich(japanese_momentum(g, -1.0), V), 4));
}

TEST_CASE("position multipliers refuse non-finite values with the node") {
  const GridSpec g = GridSpec::make(1, 20.0, 64);
  CHECK_THROWS_WITH_AS(position_multiplier(g, "1/x", [](std::span<const double> x) { return Complex(1.0 / x[0]); }),
                       doctest::Contains("not finite"), std::invalid_argument);
}

TEST_CASE("radial momentum multipliers are limited to n = 3") {
  const GridSpec g = GridSpec::make(5, 20.0, 128, Geometry::Radial);
  CHECK_THROWS_WITH_AS(japanese_momentum(g, -1.0), doctest::Contains("n = 3"), std::invalid_argument);
}

TEST_CASE("coordinate and momentum are Hermitian") {
  const GridSpec g = GridSpec::make(2, 10.0, 32);
  for (int a = 0; a < 2; ++a) {
    CHECK(adjoint_defect(coordinate(g, a), 3, 2) < 1e-12);
    CHECK(adjoint_defect(momentum(g, a), 3, 2) < 1e-12);
  }
}

TEST_CASE("inverse |q| is regularized by epsilon0 at the origin") {
  const GridSpec g = GridSpec::make(1, 20.0, 128);
  const Vector e = point_mass(g, g.N / 2, 1.0);
  const Vector out = inverse_abs_position(g)(e);
  CHECK(out[g.N / 2].real() == doctest::Approx(1.0 / g.epsilon0));
}
