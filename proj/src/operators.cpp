#include "lapkit/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lapkit/fourier.hpp"
#include "lapkit/random.hpp"

namespace lapkit {

namespace {

std::string describe_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

bool uses_axis(const std::vector<int>& coords, int a) {
  if (coords.empty()) return true;
  for (int c : coords)
    if (c == a) return true;
  return false;
}

void check_coords(const GridSpec& grid, const std::vector<int>& coords) {
  for (int c : coords)
    if (c < 0 || c >= grid.axis_count())
      throw std::invalid_argument("coordinate index " + std::to_string(c) + " outside grid axes");
}

LinearMap fourier_diagonal(const GridSpec& grid, std::string tag, Vector symbol) {
  const bool real = symbol.imag().cwiseAbs().maxCoeff() == 0.0;
  auto sym = std::make_shared<const Vector>(std::move(symbol));
  auto fft = Fourier::for_grid(grid);
  auto fwd = [sym, fft](const Vector& in, Vector& out) { fft->multiply(*sym, in, out); };
  if (real) return LinearMap::hermitian(grid, std::move(tag), fwd);
  auto adj = [sym, fft](const Vector& in, Vector& out) { fft->multiply(sym->conjugate(), in, out); };
  return LinearMap(grid, std::move(tag), fwd, adj, false);
}

}  // namespace

double node_radius(const GridSpec& grid, std::size_t idx) {
  std::vector<double> pt(static_cast<std::size_t>(grid.axis_count()));
  grid.node_point(idx, pt);
  double r2 = 0.0;
  for (double x : pt) r2 += x * x;
  return std::sqrt(r2);
}

void evaluation_point(const GridSpec& grid, std::size_t idx, std::span<double> out) {
  if (grid.is_radial()) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = std::abs(grid.node(static_cast<int>(idx)));
    return;
  }
  grid.node_point(idx, out);
}

LinearMap kinetic_energy(const GridSpec& grid, const std::vector<int>& coords) {
  check_coords(grid, coords);
  const std::size_t size = grid.size();
  Vector sym(static_cast<Eigen::Index>(size));
  std::vector<double> xi(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < size; ++i) {
    grid.frequency_point(i, xi);
    double s = 0.0;
    for (std::size_t a = 0; a < xi.size(); ++a)
      if (uses_axis(coords, static_cast<int>(a))) s += xi[a] * xi[a];
    sym[static_cast<Eigen::Index>(i)] = s;
  }
  return fourier_diagonal(grid, coords.empty() ? "Δ" : "Δ_K", std::move(sym));
}

LinearMap laplacian(const GridSpec& grid) {
  const std::size_t size = grid.size();
  LinearMap kinetic = kinetic_energy(grid);
  if (!grid.is_radial() || grid.n == 3) return kinetic;
  const double c = 0.25 * (grid.n - 1) * (grid.n - 3);
  const double e2 = grid.epsilon0 * grid.epsilon0;
  Vector centrifugal(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) {
    const double x = grid.node(static_cast<int>(i));
    centrifugal[static_cast<Eigen::Index>(i)] = c / (x * x + e2);
  }
  return (kinetic + LinearMap::diagonal(grid, "centrifugal", std::move(centrifugal))).with_tag("Δ");
}

LinearMap position_multiplier(const GridSpec& grid, std::string tag, const PointFn& f) {
  grid.validate();
  const std::size_t size = grid.size();
  Vector values(static_cast<Eigen::Index>(size));
  std::vector<double> pt(static_cast<std::size_t>(grid.is_radial() ? grid.n : grid.axis_count()));
  for (std::size_t i = 0; i < size; ++i) {
    evaluation_point(grid, i, pt);
    const Complex v = f(pt);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("position multiplier '" + tag + "' is not finite at node " + describe_point(pt));
    values[static_cast<Eigen::Index>(i)] = v;
  }
  return LinearMap::diagonal(grid, std::move(tag), std::move(values));
}

LinearMap momentum_multiplier(const GridSpec& grid, std::string tag, const PointFn& g) {
  grid.validate();
  if (grid.is_radial() && grid.n != 3)
    throw std::invalid_argument("momentum multipliers on radial grids require n = 3 (got n = " +
                                std::to_string(grid.n) + ")");
  const std::size_t size = grid.size();
  Vector sym(static_cast<Eigen::Index>(size));
  std::vector<double> xi(static_cast<std::size_t>(grid.is_radial() ? grid.n : grid.axis_count()), 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    if (grid.is_radial()) {
      xi[0] = std::abs(grid.frequency(static_cast<int>(i)));
    } else {
      grid.frequency_point(i, xi);
    }
    const Complex v = g(xi);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("momentum multiplier '" + tag + "' is not finite at frequency " +
                                  describe_point(xi));
    sym[static_cast<Eigen::Index>(i)] = v;
  }
  return fourier_diagonal(grid, std::move(tag), std::move(sym));
}

LinearMap coordinate(const GridSpec& grid, int axis) {
  check_coords(grid, {axis});
  const std::size_t size = grid.size();
  Vector values(static_cast<Eigen::Index>(size));
  std::vector<double> pt(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < size; ++i) {
    grid.node_point(i, pt);
    values[static_cast<Eigen::Index>(i)] = pt[static_cast<std::size_t>(axis)];
  }
  return LinearMap::diagonal(grid, "q" + std::to_string(axis + 1), std::move(values));
}

LinearMap momentum(const GridSpec& grid, int axis) {
  check_coords(grid, {axis});
  const std::size_t size = grid.size();
  Vector sym(static_cast<Eigen::Index>(size));
  std::size_t stride = 1;
  for (int a = grid.axis_count() - 1; a > axis; --a) stride *= static_cast<std::size_t>(grid.N);
  const auto N = static_cast<std::size_t>(grid.N);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t k = (i / stride) % N;
    // The Nyquist mode has no sign partner; zeroing it keeps p real on real functions.
    sym[static_cast<Eigen::Index>(i)] = k == N / 2 ? 0.0 : grid.frequency(static_cast<int>(k));
  }
  return fourier_diagonal(grid, "p" + std::to_string(axis + 1), std::move(sym));
}

LinearMap japanese_position(const GridSpec& grid, double s) {
  return position_multiplier(grid, "<q>^" + std::to_string(s), [s](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return Complex(std::pow(1.0 + r2, 0.5 * s), 0.0);
  });
}

LinearMap inverse_abs_position(const GridSpec& grid, const std::vector<int>& coords) {
  check_coords(grid, coords);
  const double e2 = grid.epsilon0 * grid.epsilon0;
  const bool radial = grid.is_radial();
  return position_multiplier(grid, coords.empty() ? "|q|^-1" : "|q_x|^-1",
                             [coords, e2, radial](std::span<const double> x) {
                               double r2 = 0.0;
                               for (std::size_t a = 0; a < x.size(); ++a)
                                 if (radial || uses_axis(coords, static_cast<int>(a))) r2 += x[a] * x[a];
                               return Complex(1.0 / std::sqrt(r2 + e2), 0.0);
                             });
}

LinearMap japanese_momentum(const GridSpec& grid, double t, const std::vector<int>& coords) {
  check_coords(grid, coords);
  const bool radial = grid.is_radial();
  return momentum_multiplier(grid, (coords.empty() ? "<p>^" : "<p_x>^") + std::to_string(t),
                             [coords, t, radial](std::span<const double> xi) {
                               double k2 = 0.0;
                               for (std::size_t a = 0; a < xi.size(); ++a)
                                 if (radial || uses_axis(coords, static_cast<int>(a))) k2 += xi[a] * xi[a];
                               return Complex(std::pow(1.0 + k2, 0.5 * t), 0.0);
                             });
}

LinearMap WeightSpec::realize(const GridSpec& grid) const {
  LinearMap w = LinearMap::identity(grid);
  if (singular) w = inverse_abs_position(grid, coords);
  if (s != 0.0) w = compose(japanese_position(grid, s), w);
  if (t != 0.0) w = compose(japanese_momentum(grid, t, coords), w);
  return w;
}

double weighted_norm(const StateVector& state, const WeightSpec& w) {
  const LinearMap W = w.realize(state.grid());
  return grid_norm(state.grid(), W(state.values()));
}

HardyPair hardy_check(const StateVector& state) {
  const GridSpec& g = state.grid();
  if (g.n < 3)
    throw std::invalid_argument("hardy_check: the Hardy inequality requires dimension n >= 3 (got n = " +
                                std::to_string(g.n) + ")");
  HardyPair out;
  if (state.norm() == 0.0) return out;
  const double c = 0.25 * (g.n - 2) * (g.n - 2);
  const double wq = grid_norm(g, inverse_abs_position(g)(state.values()));
  out.lhs = c * wq * wq;
  out.rhs = inner(g, state.values(), laplacian(g)(state.values())).real();
  return out;
}

bool multiplication_test(const LinearMap& T, int trials, std::uint64_t seed) {
  const GridSpec& g = T.grid();
  Rng rng(seed);
  const int axes = g.axis_count();
  std::vector<double> pt(static_cast<std::size_t>(axes));
  for (int t = 0; t < trials; ++t) {
    std::vector<double> k(static_cast<std::size_t>(axes));
    for (auto& kk : k) {
      // A nonzero dual-lattice frequency in the lower half band.
      int m = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(g.N / 4));
      if (rng.uniform() < 0.5) m = -m;
      kk = std::numbers::pi / g.L * m;
    }
    Vector phase(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.node_point(i, pt);
      double arg = 0.0;
      for (int a = 0; a < axes; ++a) arg += k[static_cast<std::size_t>(a)] * pt[static_cast<std::size_t>(a)];
      phase[static_cast<Eigen::Index>(i)] = std::polar(1.0, arg);
    }
    const Vector f = random_vector(g.size(), rng);
    const Vector lhs = T(phase.cwiseProduct(f));
    const Vector rhs = phase.cwiseProduct(T(f));
    if (grid_norm(g, lhs - rhs) > 1e-10 * grid_norm(g, f)) return false;
  }
  return true;
}

}  // namespace lapkit
