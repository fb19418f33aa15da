#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lapkit/linear_map.hpp"
#include "lapkit/operators.hpp"

namespace lapkit {

enum class ConjugateKind { Dilation, PositionDecay, MomentumDecay };

std::string to_string(ConjugateKind k);
ConjugateKind conjugate_kind_from_string(const std::string& s);

/// Which conjugate operator to build.
///
/// active_coords holds 0-based axes; empty means all axes. When a custom
/// momentum symbol is supplied it replaces <xi>^{-mu} and must be bounded
/// with bounded xi_k d_k of it (not checked).
struct ConjugateSpec {
  ConjugateKind kind = ConjugateKind::Dilation;
  double mu = 0.0;
  std::vector<int> active_coords;
  bool allow_inadmissible = false;
  PointFn momentum_symbol;

  /// Largest admissible decay parameter for position-decay in dimension n
  /// (exclusive for n >= 3, inclusive for n <= 2).
  static double position_decay_bound(int n);

  /// Throws std::invalid_argument naming the violated bound unless
  /// allow_inadmissible is set.
  void validate(int n) const;

  std::string tag() const;
};

void to_json(nlohmann::json& j, const ConjugateSpec& s);
void from_json(const nlohmann::json& j, ConjugateSpec& s);

/// F(x) = x<x>^{-mu} and its first four derivatives (1-D).
struct FProfile {
  double F = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
};

FProfile f_derivatives(double mu, double x);

/// W(x) = -F(x) V1'(x) - F'''(x)/2. Sign is not judged here.
double w_profile(double mu, const std::function<double(double)>& v1_prime, double x);

/// A_D, A_F or A_u on the grid, restricted to active coordinates.
LinearMap build_conjugate(const GridSpec& grid, const ConjugateSpec& spec);

/// <q_K>^s with only the coordinates in K (all when empty).
LinearMap japanese_position_subset(const GridSpec& grid, double s, const std::vector<int>& coords);

/// Momentum-decay symbol lambda(xi) (defaults to <xi_K>^{-mu}).
PointFn momentum_decay_symbol(const GridSpec& grid, const ConjugateSpec& spec);

}  // namespace lapkit
