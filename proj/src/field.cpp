#include "lapkit/field.hpp"

#include <cmath>

namespace lapkit {

ScalarField ScalarField::radial(std::string tag, std::function<std::complex<double>(double)> v,
                                std::function<std::complex<double>(double)> dv,
                                std::function<std::complex<double>(double)> d2v) {
  auto radius = [](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::sqrt(r2);
  };
  ScalarField f;
  f.tag = std::move(tag);
  f.value = [v, radius](std::span<const double> x) { return v(radius(x)); };
  if (dv) {
    f.gradient = [dv, radius](std::span<const double> x, std::span<std::complex<double>> g) {
      const double r = radius(x);
      const std::complex<double> d = dv(r);
      for (std::size_t j = 0; j < x.size(); ++j) g[j] = r > 0.0 ? d * (x[j] / r) : 0.0;
    };
  }
  if (dv && d2v) {
    f.hessian = [dv, d2v, radius](std::span<const double> x, std::span<std::complex<double>> h) {
      const std::size_t n = x.size();
      const double r = radius(x);
      const std::complex<double> d2 = d2v(r);
      if (r <= 1e-12) {
        // At the origin the Hessian of a smooth radial profile is v''(0) times the identity.
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) h[j * n + k] = j == k ? d2 : 0.0;
        return;
      }
      const std::complex<double> tangential = dv(r) / r;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double ujk = x[j] * x[k] / (r * r);
          h[j * n + k] = d2 * ujk + tangential * ((j == k ? 1.0 : 0.0) - ujk);
        }
    };
  }
  return f;
}

}  // namespace lapkit
