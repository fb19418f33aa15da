#include "lapkit/krylov.hpp"

#include <cmath>
#include <vector>

namespace lapkit {

namespace {

// Complex Givens rotation zeroing b in (a, b).
void make_rotation(Complex a, Complex b, double& c, Complex& s) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double r = std::hypot(na, nb);
  c = na / r;
  s = (a / na) * std::conj(b) / r;
}

}  // namespace

SolveResult gmres(const ApplyOp& A, const ApplyOp& precond, const Vector& b, const SolverSettings& settings,
                  const Vector* x0) {
  const Eigen::Index n = b.size();
  const int m = std::max(1, settings.restart);
  SolveResult res;
  res.x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  Vector r(n), w(n), z(n);
  auto residual = [&](const Vector& x, Vector& out) {
    A(x, out);
    out = b - out;
  };
  residual(res.x, r);
  double beta = r.norm();
  std::vector<Vector> V(static_cast<std::size_t>(m + 1), Vector(n));
  Matrix H = Matrix::Zero(m + 1, m);
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<Complex> sn(static_cast<std::size_t>(m));
  Vector g(m + 1);
  while (res.iterations < settings.max_iterations) {
    if (beta <= settings.tol * bnorm) break;
    V[0] = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int k = 0;
    for (; k < m && res.iterations < settings.max_iterations; ++k) {
      const auto K = static_cast<std::size_t>(k);
      if (precond) {
        precond(V[K], z);
        A(z, w);
      } else {
        A(V[K], w);
      }
      // Modified Gram-Schmidt with one refinement pass.
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const Complex h = V[static_cast<std::size_t>(j)].dot(w);
          H(j, k) += h;
          w -= h * V[static_cast<std::size_t>(j)];
        }
      const double hn = w.norm();
      H(k + 1, k) = hn;
      if (hn > 0.0) V[K + 1] = w / hn;
      for (int j = 0; j < k; ++j) {
        const auto J = static_cast<std::size_t>(j);
        const Complex t = cs[J] * H(j, k) + sn[J] * H(j + 1, k);
        H(j + 1, k) = -std::conj(sn[J]) * H(j, k) + cs[J] * H(j + 1, k);
        H(j, k) = t;
      }
      make_rotation(H(k, k), H(k + 1, k), cs[K], sn[K]);
      H(k, k) = cs[K] * H(k, k) + sn[K] * H(k + 1, k);
      H(k + 1, k) = 0.0;
      g[k + 1] = -std::conj(sn[K]) * g[k];
      g[k] = cs[K] * g[k];
      ++res.iterations;
      if (std::abs(g[k + 1]) <= settings.tol * bnorm || hn == 0.0) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k triangle.
    Vector y(k);
    for (int i = k - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    Vector update = Vector::Zero(n);
    for (int j = 0; j < k; ++j) update += y[j] * V[static_cast<std::size_t>(j)];
    if (precond) {
      precond(update, z);
      res.x += z;
    } else {
      res.x += update;
    }
    residual(res.x, r);
    beta = r.norm();
    ++res.restarts;
  }
  res.residual = beta / bnorm;
  res.converged = res.residual <= settings.tol;
  return res;
}

}  // namespace lapkit
