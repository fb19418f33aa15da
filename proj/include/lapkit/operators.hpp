#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lapkit/linear_map.hpp"

namespace lapkit {

/// Pointwise symbol on R^n. On radial grids the argument has the radius
/// (or |xi|) in component 0 and zeros elsewhere, so radial closures written
/// for R^n evaluate correctly.
using PointFn = std::function<Complex(std::span<const double>)>;

/// -sum_j d^2/dx_j^2 as the Fourier multiplier |xi|^2. Radial grids add the
/// centrifugal term (n-1)(n-3)/(4(r^2 + eps0^2)), absent for n = 3.
LinearMap laplacian(const GridSpec& grid);

/// sum_{j in coords} xi_j^2 as a Fourier multiplier (all axes when empty);
/// no centrifugal term.
LinearMap kinetic_energy(const GridSpec& grid, const std::vector<int>& coords = {});

/// f(q). Throws std::invalid_argument naming the node if f is not finite.
LinearMap position_multiplier(const GridSpec& grid, std::string tag, const PointFn& f);

/// g(p) on the FFT dual lattice. Radial grids accept only n = 3, where the
/// odd extension intertwines radial multipliers with the sine transform.
LinearMap momentum_multiplier(const GridSpec& grid, std::string tag, const PointFn& g);

/// Signed coordinate q_j. On radial grids this is the signed doubled-line
/// coordinate (odd), used only inside odd-preserving compositions.
LinearMap coordinate(const GridSpec& grid, int axis);
/// p_j = -i d/dx_j, spectral.
LinearMap momentum(const GridSpec& grid, int axis);

/// <q>^s, (|q|^2 + eps0^2)^(-1/2), <p>^t.
LinearMap japanese_position(const GridSpec& grid, double s);
LinearMap inverse_abs_position(const GridSpec& grid, const std::vector<int>& coords = {});
LinearMap japanese_momentum(const GridSpec& grid, double t, const std::vector<int>& coords = {});

/// <p>^t <q>^s (|q|+eps0)^{-1 if singular}. An empty coordinate subset
/// means all coordinates; otherwise |q_x| and <p_x> use only that subset.
struct WeightSpec {
  double s = 0.0;
  double t = 0.0;
  bool singular = false;
  std::vector<int> coords;

  LinearMap realize(const GridSpec& grid) const;
};

double weighted_norm(const StateVector& state, const WeightSpec& w);

struct HardyPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = (n-2)^2/4 ||(|q|^2+eps0^2)^{-1/2} f||^2, rhs = ||grad f||^2.
/// On radial grids the state is the reduced function u and rhs is (u, Delta u).
HardyPair hardy_check(const StateVector& state);

/// True iff ||[T, e^{ik.q}] f|| <= 1e-10 ||f|| for random dual-lattice k and f.
bool multiplication_test(const LinearMap& T, int trials, std::uint64_t seed = 0x5EED);

/// Radius of the node with index idx (|x| of the evaluation point).
double node_radius(const GridSpec& grid, std::size_t idx);

/// Evaluation point passed to PointFn for node idx (see PointFn).
void evaluation_point(const GridSpec& grid, std::size_t idx, std::span<double> out);

}  // namespace lapkit
