#include "lapkit/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace lapkit {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) {
  // FFTW takes non-const input even for out-of-place transforms it does not modify.
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

std::shared_ptr<const Fourier> Fourier::for_grid(const GridSpec& grid) {
  static std::map<std::pair<int, int>, std::shared_ptr<const Fourier>> cache;
  const auto key = std::make_pair(grid.axis_count(), grid.N);
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const Fourier> f(new Fourier(key.first, key.second));
  cache.emplace(key, f);
  return f;
}

Fourier::Fourier(int axes, int points) {
  std::vector<int> dims(static_cast<std::size_t>(axes), points);
  size_ = 1;
  for (int d : dims) size_ *= static_cast<std::size_t>(d);
  std::vector<Complex> a(size_), b(size_);
  // ESTIMATE keeps plans (and therefore rounding) identical between runs.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(axes, dims.data(), as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft(axes, dims.data(), as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW plan creation failed");
}

Fourier::~Fourier() {
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fourier::forward(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != size_) throw std::invalid_argument("Fourier: size mismatch");
  if (&in == &out) {
    Vector tmp(in.size());
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in.data()), as_fftw(tmp.data()));
    out = std::move(tmp);
    return;
  }
  out.resize(in.size());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

void Fourier::inverse(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != size_) throw std::invalid_argument("Fourier: size mismatch");
  Vector tmp(in.size());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), as_fftw(in.data()), as_fftw(tmp.data()));
  tmp /= static_cast<double>(size_);
  out = std::move(tmp);
}

void Fourier::multiply(const Vector& symbol, const Vector& in, Vector& out) const {
  Vector hat;
  forward(in, hat);
  hat.array() *= symbol.array();
  inverse(hat, out);
}

}  // namespace lapkit
