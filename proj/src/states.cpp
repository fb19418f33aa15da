#include "lapkit/states.hpp"

#include <cmath>
#include <numbers>

#include "lapkit/fourier.hpp"

namespace lapkit {

namespace {

constexpr double kProbeBand = 2.0 / 3.0;

}  // namespace

void band_limit(const GridSpec& grid, Vector& v, double fraction) {
  const auto fft = Fourier::for_grid(grid);
  Vector hat;
  fft->forward(v, hat);
  const double cutoff = fraction * std::numbers::pi / grid.spacing();
  std::vector<double> xi(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.frequency_point(i, xi);
    for (double k : xi)
      if (std::abs(k) > cutoff) {
        hat[static_cast<Eigen::Index>(i)] = 0.0;
        break;
      }
  }
  fft->inverse(hat, v);
}

Vector masked_gaussian(const GridSpec& grid, std::span<const double> center, double sigma,
                       std::span<const double> momentum) {
  const int axes = grid.axis_count();
  const Vector mask = interior_mask(grid);
  Vector v(static_cast<Eigen::Index>(grid.size()));
  std::vector<double> pt(static_cast<std::size_t>(axes));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_point(i, pt);
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < axes; ++a) {
      const auto A = static_cast<std::size_t>(a);
      const double d = pt[A] - center[A];
      r2 += d * d;
      phase += momentum[A] * pt[A];
    }
    v[static_cast<Eigen::Index>(i)] = std::exp(-r2 / (2.0 * sigma * sigma)) * std::polar(1.0, phase);
  }
  v = v.cwiseProduct(mask);
  project_symmetry(grid, v);
  band_limit(grid, v, kProbeBand);
  project_symmetry(grid, v);
  return v;
}

Vector band_limited_random(const GridSpec& grid, Rng& rng, double fraction) {
  Vector v = random_vector(grid.size(), rng);
  band_limit(grid, v, fraction);
  // Gaussian envelope of width L/10: negligible (< e^-50) at the boundary and
  // spectrally narrow, so the mask and the final cut barely change the state.
  const double s = grid.L / 10.0;
  std::vector<double> pt(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_point(i, pt);
    double r2 = 0.0;
    for (double x : pt) r2 += x * x;
    v[static_cast<Eigen::Index>(i)] *= std::exp(-r2 / (2.0 * s * s));
  }
  v = v.cwiseProduct(interior_mask(grid));
  project_symmetry(grid, v);
  band_limit(grid, v, kProbeBand);
  project_symmetry(grid, v);
  return v;
}

std::vector<Vector> orthonormalize(const GridSpec& grid, std::vector<Vector> vs, double tol) {
  std::vector<Vector> out;
  out.reserve(vs.size());
  for (auto& v : vs) {
    const double original = grid_norm(grid, v);
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : out) v -= inner(grid, u, v) * u;
    const double nv = grid_norm(grid, v);
    if (nv <= tol * original) continue;
    out.push_back(v / nv);
  }
  return out;
}

std::vector<Vector> probe_states(const GridSpec& grid, int count, std::uint64_t seed) {
  Rng rng(seed);
  const int axes = grid.axis_count();
  const int gaussians = count / 2;
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(count));
  std::vector<double> c(static_cast<std::size_t>(axes)), k(static_cast<std::size_t>(axes));
  const double kmax = 0.1 * std::numbers::pi / grid.spacing();
  for (int j = 0; j < gaussians; ++j) {
    const double sigma = rng.uniform(0.5, 1.5);
    // Centers inside the ball |c| < L/8 (per-axis box shrunk by sqrt(axes)), so
    // nonlocal conjugates see wrap-around only through exponentially small tails.
    for (auto& ci : c) ci = rng.uniform(-0.125, 0.125) * grid.L / std::sqrt(static_cast<double>(axes));
    for (auto& ki : k) ki = rng.uniform(-1.0, 1.0) * std::min(2.0, kmax);
    if (grid.is_radial()) c[0] = std::abs(c[0]);
    states.push_back(masked_gaussian(grid, c, sigma, k));
  }
  for (int j = gaussians; j < count; ++j) states.push_back(band_limited_random(grid, rng, 0.25));
  return states;
}

std::vector<Vector> test_subspace(const GridSpec& grid, int count, std::uint64_t seed) {
  // Localized probes are nearly dependent on small grids; keeping directions
  // that retain 1e-3 of their norm bounds the amplification of discretization
  // error by Gram-Schmidt.
  return orthonormalize(grid, probe_states(grid, count, seed), 1e-3);
}

}  // namespace lapkit
