#include "lapkit/grid.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "lapkit/fourier.hpp"

namespace lapkit {

std::string to_string(Geometry g) { return g == Geometry::Radial ? "radial" : "full-tensor"; }

Geometry geometry_from_string(const std::string& s) {
  if (s == "radial" || s == "radial-1d-reduction") return Geometry::Radial;
  if (s == "full-tensor" || s == "tensor") return Geometry::FullTensor;
  throw std::invalid_argument("unknown geometry '" + s + "'");
}

bool is_power_of_two(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

GridSpec GridSpec::make(int n, double L, int N, Geometry geometry) {
  GridSpec g;
  g.n = n;
  g.L = L;
  g.N = N;
  g.geometry = geometry;
  g.mask_width = N / 8;
  g.epsilon0 = 0.5 * g.spacing();
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (n < 1) throw std::invalid_argument("grid: dimension n must be >= 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid: half-width L must be positive");
  if (!is_power_of_two(N)) throw std::invalid_argument("grid: N = " + std::to_string(N) + " is not a power of two");
  if (N < 16) throw std::invalid_argument("grid: N must be >= 16");
  if (geometry == Geometry::Radial && n < 3)
    throw std::invalid_argument("grid: radial reduction requires n >= 3");
  if (geometry == Geometry::FullTensor && n > 3)
    throw std::invalid_argument("grid: full-tensor grids support n <= 3");
  if (mask_width < 0 || mask_width > N / 2) throw std::invalid_argument("grid: mask width out of range");
  if (!(epsilon0 > 0.0)) throw std::invalid_argument("grid: epsilon0 must be positive");
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < axis_count(); ++a) s *= static_cast<std::size_t>(N);
  return s;
}

double GridSpec::cell_weight() const {
  const double h = spacing();
  if (is_radial()) return 0.5 * h;
  return std::pow(h, axis_count());
}

double GridSpec::frequency(int k) const {
  const int kk = k < N / 2 ? k : k - N;
  return std::numbers::pi / L * kk;
}

void GridSpec::node_point(std::size_t idx, std::span<double> out) const {
  const int axes = axis_count();
  for (int a = axes - 1; a >= 0; --a) {
    out[static_cast<std::size_t>(a)] = node(static_cast<int>(idx % N));
    idx /= N;
  }
}

void GridSpec::frequency_point(std::size_t idx, std::span<double> out) const {
  const int axes = axis_count();
  for (int a = axes - 1; a >= 0; --a) {
    out[static_cast<std::size_t>(a)] = frequency(static_cast<int>(idx % N));
    idx /= N;
  }
}

void to_json(nlohmann::json& j, const GridSpec& g) {
  j = nlohmann::json{{"n", g.n},
                     {"L", g.L},
                     {"N", g.N},
                     {"geometry", to_string(g.geometry)},
                     {"boundary", {{"mask_width", g.mask_width}}},
                     {"epsilon0", g.epsilon0}};
}

void from_json(const nlohmann::json& j, GridSpec& g) {
  const int n = j.at("n").get<int>();
  const double L = j.value("L", 20.0);
  const int N = j.value("N", 512);
  const Geometry geom = geometry_from_string(j.value("geometry", std::string("full-tensor")));
  GridSpec out;
  out.n = n;
  out.L = L;
  out.N = N;
  out.geometry = geom;
  out.mask_width = N / 8;
  out.epsilon0 = 0.5 * out.spacing();
  if (j.contains("boundary")) out.mask_width = j.at("boundary").value("mask_width", out.mask_width);
  if (j.contains("epsilon0")) out.epsilon0 = j.at("epsilon0").get<double>();
  out.validate();
  g = out;
}

Complex inner(const GridSpec& grid, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  return grid.cell_weight() * a.dot(b);
}

double grid_norm(const GridSpec& grid, const Vector& a) { return std::sqrt(grid.cell_weight()) * a.norm(); }

void project_symmetry(const GridSpec& grid, Vector& v) {
  if (!grid.is_radial()) return;
  const int N = grid.N;
  const int c = N / 2;
  for (int m = 1; m < c; ++m) {
    const Complex odd = 0.5 * (v[c + m] - v[c - m]);
    v[c + m] = odd;
    v[c - m] = -odd;
  }
  v[c] = 0.0;
  v[0] = 0.0;
}

StateVector::StateVector(GridSpec grid, Vector values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size())
    throw std::invalid_argument("StateVector: length does not match grid");
  norm_ = grid_norm(grid_, values_);
}

StateVector StateVector::normalized() const {
  if (norm_ == 0.0) throw std::invalid_argument("StateVector: cannot normalize zero state");
  return StateVector(grid_, values_ / norm_);
}

void write_state(const std::filesystem::path& path, const Vector& values) {
  static_assert(std::endian::native == std::endian::little, "binary state format assumes little-endian host");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::uint64_t count = static_cast<std::uint64_t>(values.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double re = values[i].real(), im = values[i].imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof re);
    os.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

Vector read_state(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  Vector v(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    double re = 0, im = 0;
    is.read(reinterpret_cast<char*>(&re), sizeof re);
    is.read(reinterpret_cast<char*>(&im), sizeof im);
    v[static_cast<Eigen::Index>(i)] = {re, im};
  }
  if (!is) throw std::runtime_error("truncated state file " + path.string());
  return v;
}

namespace {

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double axis_taper(const GridSpec& grid, double x) {
  const double h = grid.spacing();
  const double half = 0.5 * grid.mask_width * h;
  if (half <= 0.0) return 1.0;
  const double dist = grid.L - std::abs(x);
  return smooth_step((dist - half) / half);
}

}  // namespace

Vector interior_mask(const GridSpec& grid) {
  const std::size_t size = grid.size();
  Vector m(static_cast<Eigen::Index>(size));
  std::vector<double> pt(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < size; ++i) {
    grid.node_point(i, pt);
    double v = 1.0;
    for (double x : pt) v *= axis_taper(grid, x);
    m[static_cast<Eigen::Index>(i)] = v;
  }
  return m;
}

double boundary_leakage(const GridSpec& grid, const Vector& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  const double half = 0.5 * grid.mask_width * grid.spacing();
  std::vector<double> pt(static_cast<std::size_t>(grid.axis_count()));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_point(i, pt);
    bool in_band = false;
    for (double x : pt) in_band = in_band || (grid.L - std::abs(x) <= half);
    if (in_band) worst = std::max(worst, std::abs(v[static_cast<Eigen::Index>(i)]));
  }
  return worst / peak;
}

double out_of_band_fraction(const GridSpec& grid, const Vector& v, double fraction) {
  Vector hat;
  Fourier::for_grid(grid)->forward(v, hat);
  const double cutoff = fraction * std::numbers::pi / grid.spacing();
  std::vector<double> xi(static_cast<std::size_t>(grid.axis_count()));
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.frequency_point(i, xi);
    const double e = std::norm(hat[static_cast<Eigen::Index>(i)]);
    total += e;
    bool out = false;
    for (double k : xi) out = out || std::abs(k) > cutoff;
    if (out) outside += e;
  }
  return total > 0.0 ? outside / total : 0.0;
}

}  // namespace lapkit
