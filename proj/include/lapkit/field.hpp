#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>

namespace lapkit {

/// Complex scalar field on R^n with optional closed-form derivatives.
///
/// gradient/hessian write into caller buffers of length n and n*n
/// (row-major). Radial fields receive points (r, 0, ..., 0) and must return
/// the Cartesian derivatives at that point.
struct ScalarField {
  using Value = std::function<std::complex<double>(std::span<const double>)>;
  using Gradient = std::function<void(std::span<const double>, std::span<std::complex<double>>)>;
  using Hessian = std::function<void(std::span<const double>, std::span<std::complex<double>>)>;

  std::string tag;
  Value value;
  Gradient gradient;
  Hessian hessian;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_hessian() const { return static_cast<bool>(hessian); }

  /// Field depending on |x| only, from the profile v(r) and its first two
  /// derivatives; gradient and Hessian are assembled in Cartesian form.
  static ScalarField radial(std::string tag, std::function<std::complex<double>(double)> v,
                            std::function<std::complex<double>(double)> dv = {},
                            std::function<std::complex<double>(double)> d2v = {});
};

}  // namespace lapkit
