#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lapkit/grid.hpp"

namespace lapkit {

/// Real symbol phi in the class S^rho, with exact Taylor coefficients.
struct Symbol {
  std::string name;
  double rho = 0.0;
  /// Coefficients phi^(j)(x)/j! for j = 0..order.
  std::function<std::vector<double>(double x, int order)> taylor;

  double value(double x) const { return taylor(x, 0)[0]; }
  double derivative(double x, int j) const;
  nlohmann::json to_json() const;
};

/// <x>^s, rho = s.
Symbol japanese_symbol(double s);
/// tanh, rho = 0.
Symbol tanh_symbol();
/// x, rho = 1.
Symbol linear_symbol();
/// {"kind": "japanese", "exponent": s} | {"kind": "tanh"} | {"kind": "linear"}.
Symbol symbol_from_json(const nlohmann::json& j);

/// phi^C(x+iy) = sum_{j<=N} phi^(j)(x)(iy)^j/j! chi(y/(c2<x>)), where chi is
/// the order-7 smoothstep cutoff with plateau |t| <= 1/2 and support |t| <= 1.
struct AlmostAnalyticExtension {
  Symbol phi;
  int taylor_order = 6;
  double c2 = 1.0;

  Complex value(double x, double y) const;
  /// (d/dx + i d/dy)/2 of value, in closed form.
  Complex dbar(double x, double y) const;
};

/// Throws std::invalid_argument when taylor_order < 1 or c2 <= 0.
/// Order 6 keeps the k = 2 remainder integrand smooth enough near the real
/// axis for 1e-7 closure at the default quadrature.
AlmostAnalyticExtension build_extension(const Symbol& phi, int taylor_order = 6, double c2 = 1.0);

struct ExtensionCheck {
  int l = 0;
  /// max |dbar phi^C| / (<x>^{rho-1-l} |y|^l) over the sample box.
  double c1 = 0.0;
  /// max |phi^C(x+i0) - phi(x)|.
  double restriction_error = 0.0;
  /// True when phi^C vanishes at every sample with |y| > c2 <x>.
  bool support_ok = true;
};

/// Samples x in [-half_width, half_width], 0 < |y| <= 2 c2 <x> on a
/// samples x samples box. Requires l <= taylor_order.
ExtensionCheck check_extension(const AlmostAnalyticExtension& ext, int l, double half_width = 10.0,
                               int samples = 100);

/// Tensor midpoint rule: x = sinh(s) with s uniform on [-s_max, s_max], and
/// y = t c2 <x> with t uniform on (0, 1), mirrored into the lower half-plane.
/// No node lies on the real axis. Sums run in a fixed node order.
struct Quadrature {
  int nx = 400;
  int ny = 200;
  double s_max = 20.0;

  Quadrature doubled() const;
};

/// Hermitian eigendecomposition functional calculus, the oracle for hs_apply.
Matrix functional_calculus(const Symbol& phi, const Matrix& B, int derivative = 0);

/// phi(B) = -(1/pi) int dbar phi^C(z) (z - B)^{-1} dx dy. B Hermitian, size <= 512.
Matrix hs_apply(const AlmostAnalyticExtension& ext, const Matrix& B, const Quadrature& quad = {});

/// ad_B(T) = [B, T].
Matrix ad_power(const Matrix& B, const Matrix& T, int j);

struct CommutatorExpansion {
  /// terms[j-1] = (-1)^{j-1}/j! phi^(j)(B) ad_B^j(T), j = 1..k-1.
  std::vector<Matrix> terms;
  /// (-1)^{k-1} (-1/pi) int dbar phi^C (z-B)^{-k} ad_B^k(T) (z-B)^{-1} dx dy.
  Matrix remainder;
  Matrix commutator;
  /// ||[phi(B),T] - sum terms - remainder|| / ||[phi(B),T]||; absolute when
  /// ||[phi(B),T]|| <= 1e-12 max(1, ||T||).
  double closure_error = 0.0;
};

/// Requires 1 <= k <= 3, rho < k and taylor_order >= k + 1 so the remainder
/// integrand stays integrable at the real axis.
CommutatorExpansion hs_commutator_expansion(const AlmostAnalyticExtension& ext, const Matrix& B, const Matrix& T,
                                            int k, const Quadrature& quad = {});

/// The remainder from the exact identity [phi(B),T] - sum terms, entrywise
/// in the eigenbasis of B.
Matrix exact_remainder(const Symbol& phi, const Matrix& B, const Matrix& T, int k);

/// Throws std::invalid_argument unless s' < 1, s < k and rho + s + s' < k.
void check_weight_admissible(double rho, int k, double s, double s_prime);

/// ||<B>^s I <B>^{s'}|| (operator norm). The admissibility check runs unless
/// allow_inadmissible is set.
double rest_weighted_bound(const Matrix& remainder, const Matrix& B, double s, double s_prime, double rho, int k,
                           bool allow_inadmissible = false);

struct TrendPoint {
  double radius = 0.0;
  int dimension = 0;
  double norm = 0.0;
};

struct WeightedTrend {
  double s = 0.0, s_prime = 0.0;
  std::vector<TrendPoint> points;
  /// max norm / min norm over the family.
  double spread = 0.0;
};

/// Family of B with spectra uniform in [-r, r] at fixed density (dimension
/// 12 r, capped at 512) and T whose entries decay like exp(-(d_m - d_n)^2/2)
/// in the eigenbasis, so every ad_B^j(T) stays bounded as r grows.
WeightedTrend weighted_trend(const Symbol& phi, int k, double s, double s_prime, const std::vector<double>& radii,
                             std::uint64_t seed, bool allow_inadmissible = false);

/// err(quad) / err(quad.doubled()) against the eigendecomposition oracle.
double quadrature_doubling_ratio(const AlmostAnalyticExtension& ext, const Matrix& B, const Quadrature& quad);

/// Random Hermitian matrix with spectrum uniform in [-radius, radius].
Matrix random_hermitian(int dimension, double radius, std::uint64_t seed);

double operator_norm(const Matrix& M);

struct HsDemoConfig {
  nlohmann::json phi = {{"kind", "japanese"}, {"exponent", -1.0}};
  int k = 2;
  int dimension = 40;
  double radius = 3.0;
  double s = 1.5;
  double s_prime = 0.4;
  std::vector<double> radii{4.0, 8.0, 16.0};
  bool allow_inadmissible = false;
  Quadrature quadrature;
  std::uint64_t seed = 0x5EED;
};

HsDemoConfig hs_demo_config_from_json(const nlohmann::json& j);

/// Record {phi, rho, k, closure_error, weighted_trend}.
nlohmann::json run_hs_demo(const HsDemoConfig& config);

}  // namespace lapkit
