#pragma once

#include <memory>

#include "lapkit/grid.hpp"

namespace lapkit {

/// FFTW-backed transform over the axes of a grid. Plans are created once per
/// shape under a lock and executed through the new-array interface, so one
/// instance is safe to share between threads.
class Fourier {
 public:
  static std::shared_ptr<const Fourier> for_grid(const GridSpec& grid);

  ~Fourier();
  Fourier(const Fourier&) = delete;
  Fourier& operator=(const Fourier&) = delete;

  /// Unnormalized forward transform.
  void forward(const Vector& in, Vector& out) const;
  /// Inverse transform including the 1/size normalization.
  void inverse(const Vector& in, Vector& out) const;

  /// out = F^{-1} diag(symbol) F in.
  void multiply(const Vector& symbol, const Vector& in, Vector& out) const;

  std::size_t size() const { return size_; }

 private:
  Fourier(int axes, int points);

  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace lapkit
