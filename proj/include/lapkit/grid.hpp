#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace lapkit {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

enum class Geometry { FullTensor, Radial };

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

/// Truncated-domain discretization.
///
/// FullTensor: N^n nodes x_j = -L + j h on [-L, L)^n, periodic, h = 2L/N.
/// Radial: the s-wave reduction u(r) = r^{(n-1)/2} f(r) stored as an odd
/// function on the doubled line [-L, L) with N nodes; oddness plus
/// periodicity gives Dirichlet conditions at r = 0 and r = L, and the
/// independent unknowns are the N/2 - 1 nodes with 0 < r < L.
struct GridSpec {
  int n = 1;
  double L = 20.0;
  int N = 512;
  Geometry geometry = Geometry::FullTensor;
  int mask_width = 64;
  double epsilon0 = 0.0390625;

  /// Spacing, mask width N/8 and epsilon0 = h/2 filled in from (n, L, N).
  static GridSpec make(int n, double L, int N, Geometry geometry = Geometry::FullTensor);

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;

  double spacing() const { return 2.0 * L / N; }
  int axis_count() const { return geometry == Geometry::Radial ? 1 : n; }
  std::size_t size() const;
  /// Quadrature weight per node so that the l2 norm approximates L2.
  double cell_weight() const;
  bool is_radial() const { return geometry == Geometry::Radial; }

  double node(int j) const { return -L + j * spacing(); }
  /// Dual lattice frequency for FFT index k in [0, N).
  double frequency(int k) const;

  /// Coordinates of the node with linear index idx (row-major, axis 0 slowest).
  void node_point(std::size_t idx, std::span<double> out) const;
  void frequency_point(std::size_t idx, std::span<double> out) const;

  bool operator==(const GridSpec& other) const = default;
};

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);

/// Grid inner product (a, b) = w * sum conj(a) b.
Complex inner(const GridSpec& grid, const Vector& a, const Vector& b);
double grid_norm(const GridSpec& grid, const Vector& a);

/// Project onto the odd subspace of the radial representation; identity
/// for full-tensor grids.
void project_symmetry(const GridSpec& grid, Vector& v);

/// Complex grid function with a cached norm.
class StateVector {
 public:
  StateVector(GridSpec grid, Vector values);

  const GridSpec& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  double norm() const { return norm_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  StateVector normalized() const;

 private:
  GridSpec grid_;
  Vector values_;
  double norm_;
};

/// Little-endian binary: uint64 element count followed by interleaved
/// (re, im) float64 pairs.
void write_state(const std::filesystem::path& path, const Vector& values);
Vector read_state(const std::filesystem::path& path);

/// Boundary taper: 0 within mask_width/2 nodes of the boundary, smooth
/// (C-infinity) ramp over the next mask_width/2 nodes, 1 in the interior.
Vector interior_mask(const GridSpec& grid);

/// Largest |v| on the zero band of the mask relative to max |v|.
double boundary_leakage(const GridSpec& grid, const Vector& v);

/// Spectral energy fraction outside the band |xi_a| <= fraction * xi_max.
double out_of_band_fraction(const GridSpec& grid, const Vector& v, double fraction);

bool is_power_of_two(int v);

}  // namespace lapkit
