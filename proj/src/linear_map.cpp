#include "lapkit/linear_map.hpp"

#include <cmath>
#include <stdexcept>

#include "lapkit/random.hpp"

namespace lapkit {

namespace {

void require_same_grid(const LinearMap& a, const LinearMap& b, const char* what) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": operators live on different grids");
}

}  // namespace

LinearMap::LinearMap(GridSpec grid, std::string tag, ApplyFn apply, ApplyFn adjoint, bool hermitian)
    : grid_(std::move(grid)),
      tag_(std::move(tag)),
      apply_(std::make_shared<const ApplyFn>(std::move(apply))),
      adjoint_(std::make_shared<const ApplyFn>(std::move(adjoint))),
      hermitian_(hermitian) {}

LinearMap LinearMap::hermitian(GridSpec grid, std::string tag, ApplyFn apply) {
  LinearMap m(std::move(grid), std::move(tag), apply, apply, true);
  m.adjoint_ = m.apply_;
  return m;
}

LinearMap LinearMap::identity(const GridSpec& grid) {
  return hermitian(grid, "1", [](const Vector& in, Vector& out) { out = in; });
}

LinearMap LinearMap::zero(const GridSpec& grid) {
  return hermitian(grid, "0", [](const Vector& in, Vector& out) { out = Vector::Zero(in.size()); });
}

LinearMap LinearMap::diagonal(const GridSpec& grid, std::string tag, Vector values) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw std::invalid_argument("diagonal: length does not match grid");
  const bool real = values.imag().cwiseAbs().maxCoeff() == 0.0;
  auto d = std::make_shared<const Vector>(std::move(values));
  auto fwd = [d](const Vector& in, Vector& out) { out = d->cwiseProduct(in); };
  if (real) return hermitian(grid, std::move(tag), fwd);
  auto adj = [d](const Vector& in, Vector& out) { out = d->conjugate().cwiseProduct(in); };
  return LinearMap(grid, std::move(tag), fwd, adj, false);
}

LinearMap LinearMap::dense(const GridSpec& grid, std::string tag, Matrix m, bool hermitian) {
  if (static_cast<std::size_t>(m.rows()) != grid.size() || m.rows() != m.cols())
    throw std::invalid_argument("dense: matrix shape does not match grid");
  auto mat = std::make_shared<const Matrix>(std::move(m));
  auto fwd = [mat](const Vector& in, Vector& out) { out = (*mat) * in; };
  if (hermitian) return LinearMap::hermitian(grid, std::move(tag), fwd);
  auto adj = [mat](const Vector& in, Vector& out) { out = mat->adjoint() * in; };
  return LinearMap(grid, std::move(tag), fwd, adj, false);
}

Vector LinearMap::operator()(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

Vector LinearMap::adjoint_apply(const Vector& in) const {
  Vector out;
  apply_adjoint(in, out);
  return out;
}

LinearMap LinearMap::adjoint() const {
  if (hermitian_) return *this;
  LinearMap m = *this;
  std::swap(m.apply_, m.adjoint_);
  m.tag_ = "(" + tag_ + ")^†";
  return m;
}

LinearMap LinearMap::with_tag(std::string tag) const {
  LinearMap m = *this;
  m.tag_ = std::move(tag);
  return m;
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {
  require_same_grid(a, b, "compose");
  auto fwd = [a, b](const Vector& in, Vector& out) {
    Vector tmp;
    b.apply(in, tmp);
    a.apply(tmp, out);
  };
  auto adj = [a, b](const Vector& in, Vector& out) {
    Vector tmp;
    a.apply_adjoint(in, tmp);
    b.apply_adjoint(tmp, out);
  };
  return LinearMap(a.grid(), a.tag() + "·" + b.tag(), fwd, adj, false);
}

LinearMap sandwich(const LinearMap& outer, const LinearMap& inner) {
  require_same_grid(outer, inner, "sandwich");
  auto fwd = [outer, inner](const Vector& in, Vector& out) {
    Vector t1, t2;
    outer.apply_adjoint(in, t1);
    inner.apply(t1, t2);
    outer.apply(t2, out);
  };
  std::string tag = outer.tag() + "·" + inner.tag() + "·" + outer.tag() + (outer.is_hermitian() ? "" : "^†");
  if (inner.is_hermitian()) return LinearMap::hermitian(outer.grid(), std::move(tag), fwd);
  auto adj = [outer, inner](const Vector& in, Vector& out) {
    Vector t1, t2;
    outer.apply_adjoint(in, t1);
    inner.apply_adjoint(t1, t2);
    outer.apply(t2, out);
  };
  return LinearMap(outer.grid(), std::move(tag), fwd, adj, false);
}

LinearMap operator+(const LinearMap& a, const LinearMap& b) {
  require_same_grid(a, b, "sum");
  auto fwd = [a, b](const Vector& in, Vector& out) {
    Vector tmp;
    a.apply(in, out);
    b.apply(in, tmp);
    out += tmp;
  };
  std::string tag = a.tag() + " + " + b.tag();
  if (a.is_hermitian() && b.is_hermitian()) return LinearMap::hermitian(a.grid(), std::move(tag), fwd);
  auto adj = [a, b](const Vector& in, Vector& out) {
    Vector tmp;
    a.apply_adjoint(in, out);
    b.apply_adjoint(in, tmp);
    out += tmp;
  };
  return LinearMap(a.grid(), std::move(tag), fwd, adj, false);
}

LinearMap operator-(const LinearMap& a, const LinearMap& b) {
  return (a + scale(-1.0, b)).with_tag(a.tag() + " - " + b.tag());
}

LinearMap scale(Complex c, const LinearMap& a) {
  auto fwd = [c, a](const Vector& in, Vector& out) {
    a.apply(in, out);
    out *= c;
  };
  std::string tag = "(" + std::to_string(c.real()) + (c.imag() != 0.0 ? "+" + std::to_string(c.imag()) + "i" : "") +
                    ")" + a.tag();
  if (a.is_hermitian() && c.imag() == 0.0) return LinearMap::hermitian(a.grid(), std::move(tag), fwd);
  auto adj = [c, a](const Vector& in, Vector& out) {
    a.apply_adjoint(in, out);
    out *= std::conj(c);
  };
  return LinearMap(a.grid(), std::move(tag), fwd, adj, false);
}

LinearMap symmetric_product(const LinearMap& a, const LinearMap& b) {
  require_same_grid(a, b, "symmetric_product");
  auto fwd = [a, b](const Vector& in, Vector& out) {
    Vector t1, t2;
    b.apply(in, t1);
    a.apply(t1, out);
    a.apply(in, t1);
    b.apply(t1, t2);
    out = 0.5 * (out + t2);
  };
  std::string tag = "½(" + a.tag() + "·" + b.tag() + " + " + b.tag() + "·" + a.tag() + ")";
  if (a.is_hermitian() && b.is_hermitian()) return LinearMap::hermitian(a.grid(), std::move(tag), fwd);
  auto adj = [a, b](const Vector& in, Vector& out) {
    Vector t1, t2;
    a.apply_adjoint(in, t1);
    b.apply_adjoint(t1, out);
    b.apply_adjoint(in, t1);
    a.apply_adjoint(t1, t2);
    out = 0.5 * (out + t2);
  };
  return LinearMap(a.grid(), std::move(tag), fwd, adj, false);
}

Matrix assemble(const LinearMap& map) {
  const auto n = static_cast<Eigen::Index>(map.size());
  Matrix m(n, n);
  Vector e = Vector::Zero(n), col;
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    map.apply(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

double adjoint_defect(const LinearMap& map, int trials, std::uint64_t seed) {
  Rng rng(seed);
  const GridSpec& g = map.grid();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector f = random_vector(map.size(), rng);
    Vector h = random_vector(map.size(), rng);
    const Complex lhs = inner(g, h, map(f));
    const Complex rhs = inner(g, map.adjoint_apply(h), f);
    worst = std::max(worst, std::abs(lhs - rhs) / (grid_norm(g, f) * grid_norm(g, h)));
  }
  return worst;
}

NormEstimate estimate_norm(const LinearMap& map, int steps, std::uint64_t seed, double stagnation_tol,
                           bool use_adjoint_first) {
  Rng rng(seed);
  const GridSpec& g = map.grid();
  Vector v = random_vector(map.size(), rng);
  project_symmetry(g, v);
  v /= grid_norm(g, v);
  NormEstimate est;
  double previous = -1.0;
  Vector w, u;
  for (int k = 0; k < steps; ++k) {
    if (use_adjoint_first) {
      map.apply_adjoint(v, w);
      map.apply(w, u);
    } else {
      map.apply(v, w);
      map.apply_adjoint(w, u);
    }
    project_symmetry(g, u);
    const double rayleigh = std::max(0.0, inner(g, v, u).real());
    est.value = std::sqrt(rayleigh);
    est.iterations = k + 1;
    const double nu = grid_norm(g, u);
    if (nu == 0.0) break;
    v = u / nu;
    if (previous > 0.0 && std::abs(rayleigh - previous) <= stagnation_tol * rayleigh) {
      est.stagnated = true;
      break;
    }
    previous = rayleigh;
  }
  return est;
}

}  // namespace lapkit
