#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "lapkit/fourier.hpp"
#include "lapkit/grid.hpp"
#include "lapkit/random.hpp"
#include "lapkit/states.hpp"

using namespace lapkit;

TEST_CASE("grid defaults and derived quantities") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  CHECK(g.spacing() == doctest::Approx(40.0 / 512));
  CHECK(g.mask_width == 64);
  CHECK(g.epsilon0 == doctest::Approx(0.5 * g.spacing()));
  CHECK(g.size() == 512);
  CHECK(g.node(0) == doctest::Approx(-20.0));
  CHECK(g.frequency(1) == doctest::Approx(std::numbers::pi / 20.0));
  CHECK(g.frequency(511) == doctest::Approx(-std::numbers::pi / 20.0));

  const GridSpec t = GridSpec::make(3, 20.0, 64);
  CHECK(t.size() == 64u * 64u * 64u);
  const GridSpec r = GridSpec::make(3, 20.0, 512, Geometry::Radial);
  CHECK(r.size() == 512);
  CHECK(r.axis_count() == 1);
}

TEST_CASE("grid validation names the violated invariant") {
  CHECK_THROWS_WITH_AS(GridSpec::make(1, 20.0, 500), doctest::Contains("power of two"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(GridSpec::make(1, -1.0, 512), doctest::Contains("L"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(GridSpec::make(2, 20.0, 64, Geometry::Radial), doctest::Contains("n >= 3"),
                       std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(4, 20.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(geometry_from_string("spherical"), std::invalid_argument);
}

TEST_CASE("grid json round trip") {
  const GridSpec g = GridSpec::make(3, 12.5, 256, Geometry::Radial);
  nlohmann::json j = g;
  CHECK(j.get<GridSpec>() == g);
}

TEST_CASE("Parseval: the unnormalized transform scales norms by sqrt(size)") {
  for (const GridSpec& g : {GridSpec::make(1, 20.0, 512), GridSpec::make(2, 10.0, 32)}) {
    const auto fft = Fourier::for_grid(g);
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector f = random_vector(g.size(), rng);
      Vector F, back;
      fft->forward(f, F);
      CHECK(F.norm() / std::sqrt(static_cast<double>(g.size())) == doctest::Approx(f.norm()).epsilon(1e-12));
      fft->inverse(F, back);
      CHECK((back - f).norm() <= 1e-12 * f.norm());
    }
  }
}

TEST_CASE("Fourier plans are shared per shape") {
  const GridSpec g = GridSpec::make(1, 20.0, 256);
  CHECK(Fourier::for_grid(g).get() == Fourier::for_grid(GridSpec::make(1, 5.0, 256)).get());
}

TEST_CASE("inner product and norm agree") {
  const GridSpec g = GridSpec::make(1, 20.0, 128);
  Rng rng(3);
  const Vector a = random_vector(g.size(), rng);
  CHECK(std::sqrt(inner(g, a, a).real()) == doctest::Approx(grid_norm(g, a)));
  CHECK(std::abs(inner(g, a, a).imag()) < 1e-12 * grid_norm(g, a) * grid_norm(g, a));
}

TEST_CASE("a normalized Gaussian has unit L2 norm") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (int j = 0; j < g.N; ++j) v[j] = std::exp(-g.node(j) * g.node(j) / 2.0);
  CHECK(grid_norm(g, v) == doctest::Approx(std::pow(std::numbers::pi, 0.25)).epsilon(1e-12));
}

TEST_CASE("radial symmetry projection yields odd states") {
  const GridSpec g = GridSpec::make(3, 20.0, 256, Geometry::Radial);
  Rng rng(5);
  Vector v = random_vector(g.size(), rng);
  project_symmetry(g, v);
  CHECK(std::abs(v[0]) == 0.0);
  CHECK(std::abs(v[g.N / 2]) == 0.0);
  for (int j = 1; j < g.N / 2; ++j) CHECK(std::abs(v[j] + v[g.N - j]) < 1e-14);
  Vector w = v;
  project_symmetry(g, w);
  CHECK((w - v).norm() < 1e-14);
}

TEST_CASE("state files round trip bit-exactly") {
  const GridSpec g = GridSpec::make(1, 20.0, 64);
  Rng rng(9);
  const Vector v = random_vector(g.size(), rng);
  const auto path = std::filesystem::temp_directory_path() / "lapkit_state_roundtrip.bin";
  write_state(path, v);
  const Vector back = read_state(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == v.size());
  CHECK((back - v).norm() == 0.0);
}

TEST_CASE("interior mask vanishes at the boundary band and is one inside") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  const Vector m = interior_mask(g);
  for (int j = 0; j < g.mask_width / 2; ++j) {
    CHECK(std::abs(m[j]) == 0.0);
    CHECK(std::abs(m[g.N - 1 - j]) == 0.0);
  }
  for (int j = g.mask_width; j < g.N - g.mask_width; ++j) CHECK(std::abs(m[j] - 1.0) == 0.0);
  for (int j = 0; j < g.N; ++j) {
    CHECK(m[j].real() >= 0.0);
    CHECK(m[j].real() <= 1.0);
  }
}

TEST_CASE("band-limited random states are masked and band limited") {
  const GridSpec g = GridSpec::make(1, 20.0, 512);
  Rng rng(21);
  const Vector v = band_limited_random(g, rng);
  CHECK(boundary_leakage(g, v) < 1e-12);
  CHECK(out_of_band_fraction(g, v, 2.0 / 3.0) < 1e-20);
}
