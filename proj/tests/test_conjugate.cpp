#include <doctest.h>

#include <cmath>

#include "lapkit/conjugate.hpp"
#include "lapkit/random.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

namespace {

ConjugateSpec spec(ConjugateKind kind, double mu, std::vector<int> coords = {}) {
  ConjugateSpec s;
  s.kind = kind;
  s.mu = mu;
  s.active_coords = std::move(coords);
  return s;
}

double relative(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(a.norm(), b.norm()); }

}  // namespace

TEST_CASE("F profile examples") {
  const FProfile p = f_derivatives(0.0, 1.7);
  CHECK(p.F == doctest::Approx(1.7));
  CHECK(p.d1 == doctest::Approx(1.0));
  CHECK(p.d2 == 0.0);
  CHECK(p.d3 == 0.0);
  for (double mu : {0.25, 0.5, 1.0}) CHECK(f_derivatives(mu, 0.0).d2 == 0.0);
}

TEST_CASE("F derivatives match finite differences") {
  // F(x) = x - mu x^3/2 + O(x^5) pins F'''(0) = -3 mu.
  for (double mu : {0.1, 0.5, 1.0, 1.5}) {
    CHECK(f_derivatives(mu, 0.0).d3 == doctest::Approx(-3.0 * mu).epsilon(1e-13));
    for (double x : {-2.3, -0.4, 0.7, 3.1}) {
      const double h = 1e-4;
      const FProfile p = f_derivatives(mu, x), a = f_derivatives(mu, x + h), b = f_derivatives(mu, x - h);
      CHECK((a.F - b.F) / (2 * h) == doctest::Approx(p.d1).epsilon(1e-7));
      CHECK((a.d1 - b.d1) / (2 * h) == doctest::Approx(p.d2).epsilon(1e-6));
      CHECK((a.d2 - b.d2) / (2 * h) == doctest::Approx(p.d3).epsilon(1e-6));
      CHECK((a.d3 - b.d3) / (2 * h) == doctest::Approx(p.d4).epsilon(1e-6));
    }
  }
}

TEST_CASE("W profile examples") {
  const auto flat = [](double) { return 0.0; };
  for (double x : {-1.0, 0.0, 2.0}) CHECK(w_profile(0.0, flat, x) == 0.0);
  CHECK(w_profile(0.5, flat, 0.0) == doctest::Approx(-0.5 * f_derivatives(0.5, 0.0).d3));
  CHECK(w_profile(0.5, flat, 0.0) == doctest::Approx(0.75));
}

TEST_CASE("admissible ranges") {
  CHECK(ConjugateSpec::position_decay_bound(3) == doctest::Approx(1.0 / 16.0));
  CHECK(ConjugateSpec::position_decay_bound(1) == 1.0);
  CHECK_NOTHROW(spec(ConjugateKind::PositionDecay, 1.0 / 32).validate(3));
  CHECK_THROWS_WITH_AS(spec(ConjugateKind::PositionDecay, 0.1).validate(3), doctest::Contains("position-decay"),
                       std::invalid_argument);
  CHECK_NOTHROW(spec(ConjugateKind::PositionDecay, 1.0).validate(1));
  CHECK_THROWS_AS(spec(ConjugateKind::PositionDecay, 1.5).validate(1), std::invalid_argument);
  CHECK_THROWS_WITH_AS(spec(ConjugateKind::MomentumDecay, 2.0).validate(3), doctest::Contains("0 < mu < 2"),
                       std::invalid_argument);
  ConjugateSpec over = spec(ConjugateKind::PositionDecay, 0.5);
  over.allow_inadmissible = true;
  CHECK_NOTHROW(over.validate(3));
  CHECK(over.tag().find("override") != std::string::npos);
  CHECK_THROWS_AS(spec(ConjugateKind::Dilation, 0.0, {3}).validate(3), std::invalid_argument);
}

TEST_CASE("conjugate specs round trip through json with 1-based coordinates") {
  const ConjugateSpec s = spec(ConjugateKind::MomentumDecay, 1.5, {0, 2});
  const nlohmann::json j = s;
  CHECK(j.at("active_coords") == nlohmann::json::array({1, 3}));
  const ConjugateSpec back = j.get<ConjugateSpec>();
  CHECK(back.kind == s.kind);
  CHECK(back.mu == s.mu);
  CHECK(back.active_coords == s.active_coords);
}

TEST_CASE("every conjugate operator is Hermitian") {
  const GridSpec one = GridSpec::make(1, 20.0, 256);
  const GridSpec rad = GridSpec::make(3, 20.0, 256, Geometry::Radial);
  const GridSpec two = GridSpec::make(2, 10.0, 32);
  for (const GridSpec& g : {one, rad, two}) {
    for (const ConjugateSpec& s : {spec(ConjugateKind::Dilation, 0.0), spec(ConjugateKind::PositionDecay, 0.05),
                                   spec(ConjugateKind::MomentumDecay, 1.0)}) {
      const LinearMap A = build_conjugate(g, s);
      CHECK(A.is_hermitian());
      CHECK(adjoint_defect(A, 3, 4) <= 1e-10);
    }
  }
  CHECK(adjoint_defect(build_conjugate(two, spec(ConjugateKind::Dilation, 0.0, {1})), 3, 4) <= 1e-10);
}

TEST_CASE("position decay at mu = 0 coincides with the dilation generator") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  Rng rng(2);
  const Vector f = band_limited_random(g, rng);
  CHECK(relative(build_conjugate(g, spec(ConjugateKind::PositionDecay, 0.0))(f),
                 build_conjugate(g, spec(ConjugateKind::Dilation, 0.0))(f)) <= 1e-12);
}

TEST_CASE("position decay is the factorized sandwich of the dilation generator") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  Rng rng(3);
  const Vector f = band_limited_random(g, rng);
  for (double mu : {0.25, 1.0}) {
    const LinearMap J = japanese_position(g, -mu / 2);
    const LinearMap AD = build_conjugate(g, spec(ConjugateKind::Dilation, 0.0));
    CHECK(relative(build_conjugate(g, spec(ConjugateKind::PositionDecay, mu))(f), compose(J, compose(AD, J))(f)) <=
          1e-12);
  }
}

TEST_CASE("position decay tends to the dilation generator as mu -> 0") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  const std::vector<double> c{0.5}, k{0.3};
  const Vector f = masked_gaussian(g, c, 1.0, k);
  const Vector d = build_conjugate(g, spec(ConjugateKind::Dilation, 0.0))(f);
  double previous = std::numeric_limits<double>::infinity();
  for (double mu : {1e-1, 1e-2, 1e-3}) {
    const double gap = grid_norm(g, build_conjugate(g, spec(ConjugateKind::PositionDecay, mu))(f) - d) / grid_norm(g, f);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-2);
}

TEST_CASE("partial conjugates act on their coordinates only") {
  const GridSpec g = GridSpec::make(2, 10.0, 32);
  const GridSpec line = GridSpec::make(1, 10.0, 32);
  Vector fx(32), gy(32);
  for (int j = 0; j < 32; ++j) {
    const double x = line.node(j);
    fx[j] = std::exp(-x * x / 2.0) * Complex(1.0, 0.2 * x);
    gy[j] = std::exp(-(x - 0.5) * (x - 0.5));
  }
  Vector prod(32 * 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) prod[i * 32 + j] = fx[i] * gy[j];
  for (const ConjugateKind kind : {ConjugateKind::Dilation, ConjugateKind::MomentumDecay}) {
    const double mu = kind == ConjugateKind::Dilation ? 0.0 : 1.0;
    const Vector lhs = build_conjugate(g, spec(kind, mu, {0}))(prod);
    const Vector Af = build_conjugate(line, spec(kind, mu))(fx);
    Vector rhs(32 * 32);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) rhs[i * 32 + j] = Af[i] * gy[j];
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  }
}
