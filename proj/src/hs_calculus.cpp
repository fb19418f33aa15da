#include "lapkit/hs_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lapkit/potential.hpp"
#include "lapkit/random.hpp"

namespace lapkit {

using nlohmann::json;

namespace {

double factorial(int j) {
  double f = 1.0;
  for (int i = 2; i <= j; ++i) f *= i;
  return f;
}

double japanese(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace

double Symbol::derivative(double x, int j) const { return taylor(x, j)[static_cast<std::size_t>(j)] * factorial(j); }

json Symbol::to_json() const { return {{"name", name}, {"rho", rho}}; }

Symbol japanese_symbol(double s) {
  Symbol sym;
  sym.name = "<x>^" + json(s).dump();
  sym.rho = s;
  // w = u^a with u = 1 + x^2 (a = s/2); u w' = a u' w gives the recurrence.
  sym.taylor = [a = 0.5 * s](double x, int order) {
    const double u[3] = {1.0 + x * x, 2.0 * x, 1.0};
    std::vector<double> w(static_cast<std::size_t>(order + 1), 0.0);
    w[0] = std::pow(u[0], a);
    for (int k = 1; k <= order; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= std::min(k, 2); ++j) acc += (a * j - (k - j)) * u[j] * w[static_cast<std::size_t>(k - j)];
      w[static_cast<std::size_t>(k)] = acc / (k * u[0]);
    }
    return w;
  };
  return sym;
}

Symbol tanh_symbol() {
  Symbol sym;
  sym.name = "tanh";
  sym.rho = 0.0;
  // w' = 1 - w^2.
  sym.taylor = [](double x, int order) {
    std::vector<double> w(static_cast<std::size_t>(order + 1), 0.0);
    w[0] = std::tanh(x);
    for (int k = 0; k < order; ++k) {
      double sq = 0.0;
      for (int j = 0; j <= k; ++j) sq += w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(k - j)];
      w[static_cast<std::size_t>(k + 1)] = ((k == 0 ? 1.0 : 0.0) - sq) / (k + 1);
    }
    return w;
  };
  return sym;
}

Symbol linear_symbol() {
  Symbol sym;
  sym.name = "x";
  sym.rho = 1.0;
  sym.taylor = [](double x, int order) {
    std::vector<double> w(static_cast<std::size_t>(order + 1), 0.0);
    w[0] = x;
    if (order >= 1) w[1] = 1.0;
    return w;
  };
  return sym;
}

Symbol symbol_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "japanese") return japanese_symbol(j.at("exponent").get<double>());
  if (kind == "tanh") return tanh_symbol();
  if (kind == "linear") return linear_symbol();
  throw std::invalid_argument("unknown symbol kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

namespace {

struct Cutoff {
  double chi = 1.0, dx = 0.0, dy = 0.0;
};

// chi(y/(c2<x>)) = 1 - smoothstep7(2|t| - 1) and its partial derivatives.
Cutoff vertical_cutoff(double x, double y, double c2) {
  const double jx = japanese(x);
  const double t = std::abs(y) / (c2 * jx);
  const double a = 2.0 * t - 1.0;
  Cutoff c;
  c.chi = 1.0 - smoothstep7(a);
  const double d = -2.0 * smoothstep7_d1(a);
  if (d != 0.0) {
    c.dy = d * (y >= 0.0 ? 1.0 : -1.0) / (c2 * jx);
    c.dx = d * (-t * x / (jx * jx));
  }
  return c;
}

}  // namespace

Complex AlmostAnalyticExtension::value(double x, double y) const {
  const Cutoff c = vertical_cutoff(x, y, c2);
  if (c.chi == 0.0) return 0.0;
  const auto w = phi.taylor(x, taylor_order);
  Complex p = 0.0, iy_pow = 1.0;
  for (int j = 0; j <= taylor_order; ++j) {
    p += w[static_cast<std::size_t>(j)] * iy_pow;
    iy_pow *= Complex(0.0, y);
  }
  return p * c.chi;
}

Complex AlmostAnalyticExtension::dbar(double x, double y) const {
  const Cutoff c = vertical_cutoff(x, y, c2);
  if (c.chi == 0.0) return 0.0;
  const auto w = phi.taylor(x, taylor_order + 1);
  Complex p = 0.0, iy_pow = 1.0, top = 1.0;
  for (int j = 0; j <= taylor_order; ++j) {
    top = iy_pow;
    p += w[static_cast<std::size_t>(j)] * iy_pow;
    iy_pow *= Complex(0.0, y);
  }
  // The Taylor sum telescopes under dbar: only the top coefficient survives.
  const Complex dp = 0.5 * (taylor_order + 1) * w[static_cast<std::size_t>(taylor_order + 1)] * top;
  const Complex dchi = 0.5 * Complex(c.dx, c.dy);
  return dp * c.chi + p * dchi;
}

AlmostAnalyticExtension build_extension(const Symbol& phi, int taylor_order, double c2) {
  if (!phi.taylor) throw std::invalid_argument("symbol has no derivatives");
  if (taylor_order < 1) throw std::invalid_argument("almost-analytic extension needs taylor order >= 1");
  if (!(c2 > 0.0)) throw std::invalid_argument("cutoff width c2 must be positive");
  return {phi, taylor_order, c2};
}

ExtensionCheck check_extension(const AlmostAnalyticExtension& ext, int l, double half_width, int samples) {
  if (l < 0 || l > ext.taylor_order) throw std::invalid_argument("decay order l must lie in [0, taylor order]");
  ExtensionCheck out;
  out.l = l;
  for (int i = 0; i < samples; ++i) {
    const double x = -half_width + 2.0 * half_width * (i + 0.5) / samples;
    out.restriction_error = std::max(out.restriction_error, std::abs(ext.value(x, 0.0) - ext.phi.value(x)));
    const double ymax = 2.0 * ext.c2 * japanese(x);
    for (int j = 0; j < samples; ++j) {
      const double y = ymax * (j + 0.5) / samples;
      for (double yy : {y, -y}) {
        const Complex d = ext.dbar(x, yy);
        if (std::abs(yy) > ext.c2 * japanese(x) && (ext.value(x, yy) != 0.0 || d != 0.0)) out.support_ok = false;
        const double scale = std::pow(japanese(x), ext.phi.rho - 1.0 - l) * std::pow(std::abs(yy), l);
        out.c1 = std::max(out.c1, std::abs(d) / scale);
      }
    }
  }
  return out;
}

Quadrature Quadrature::doubled() const {
  Quadrature q = *this;
  q.nx *= 2;
  q.ny *= 2;
  return q;
}

// ---------------------------------------------------------------------------

namespace {

struct Nodes {
  std::vector<Complex> z;
  /// -(1/pi) dbar phi^C(z) dx dy.
  std::vector<Complex> w;
};

Nodes quadrature_nodes(const AlmostAnalyticExtension& ext, const Quadrature& q) {
  if (q.nx < 2 || q.ny < 1 || !(q.s_max > 0.0)) throw std::invalid_argument("invalid quadrature resolution");
  Nodes nodes;
  const double ds = 2.0 * q.s_max / q.nx;
  for (int i = 0; i < q.nx; ++i) {
    const double s = -q.s_max + (i + 0.5) * ds;
    const double x = std::sinh(s), dx = std::cosh(s) * ds;
    const double height = ext.c2 * japanese(x), dy = height / q.ny;
    for (int j = 0; j < q.ny; ++j) {
      const double y = height * (j + 0.5) / q.ny;
      for (double yy : {y, -y}) {
        const Complex d = ext.dbar(x, yy);
        if (d == 0.0) continue;
        nodes.z.emplace_back(x, yy);
        nodes.w.push_back(-d * dx * dy / std::numbers::pi);
      }
    }
  }
  return nodes;
}

struct Eig {
  Eigen::VectorXd d;
  Matrix U;
};

Eig hermitian_eig(const Matrix& B) {
  if (B.rows() != B.cols()) throw std::invalid_argument("matrix must be square");
  if (B.rows() > 512) throw std::invalid_argument("dense functional calculus is limited to dimension 512");
  const double scale = std::max(1.0, B.norm());
  if ((B - B.adjoint()).norm() > 1e-12 * scale) throw std::invalid_argument("matrix must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (B + B.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}

constexpr Eigen::Index kBlock = 2048;

// K(m, n) = sum_nodes w (z - a_m)^{-k} (z - b_n)^{-1}, blocked over nodes so
// the inner sum is a matrix product; the block order is fixed.
Matrix resolvent_kernel(const Nodes& nodes, const Eigen::VectorXd& a, const Eigen::VectorXd& b, int k) {
  const auto total = static_cast<Eigen::Index>(nodes.z.size());
  Matrix K = Matrix::Zero(a.size(), b.size());
  for (Eigen::Index start = 0; start < total; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, total - start);
    Matrix left(a.size(), len), right(len, b.size());
    for (Eigen::Index c = 0; c < len; ++c) {
      const Complex z = nodes.z[static_cast<std::size_t>(start + c)];
      const Complex w = nodes.w[static_cast<std::size_t>(start + c)];
      for (Eigen::Index m = 0; m < a.size(); ++m) {
        const Complex r = 1.0 / (z - a[m]);
        Complex rk = r;
        for (int p = 1; p < k; ++p) rk *= r;
        left(m, c) = w * rk;
      }
      for (Eigen::Index n = 0; n < b.size(); ++n) right(c, n) = 1.0 / (z - b[n]);
    }
    K.noalias() += left * right;
  }
  return K;
}

Matrix from_eigenbasis(const Eig& e, const Matrix& M) { return e.U * M * e.U.adjoint(); }

}  // namespace

Matrix functional_calculus(const Symbol& phi, const Matrix& B, int derivative) {
  const Eig e = hermitian_eig(B);
  Eigen::VectorXcd f(e.d.size());
  for (Eigen::Index i = 0; i < e.d.size(); ++i) f[i] = phi.derivative(e.d[i], derivative);
  return e.U * f.asDiagonal() * e.U.adjoint();
}

Matrix hs_apply(const AlmostAnalyticExtension& ext, const Matrix& B, const Quadrature& quad) {
  const Eig e = hermitian_eig(B);
  const Nodes nodes = quadrature_nodes(ext, quad);
  // Only the diagonal of the kernel is needed: sum_nodes w / (z - d_m).
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(e.d.size());
  for (Eigen::Index m = 0; m < e.d.size(); ++m) {
    Complex acc = 0.0;
    for (std::size_t c = 0; c < nodes.z.size(); ++c) acc += nodes.w[c] / (nodes.z[c] - e.d[m]);
    f[m] = acc;
  }
  return e.U * f.asDiagonal() * e.U.adjoint();
}

Matrix ad_power(const Matrix& B, const Matrix& T, int j) {
  Matrix out = T;
  for (int i = 0; i < j; ++i) out = B * out - out * B;
  return out;
}

namespace {

void check_expansion_order(const AlmostAnalyticExtension& ext, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("commutator expansion supports 1 <= k <= 3");
  if (!(ext.phi.rho < k)) throw std::invalid_argument("commutator expansion needs rho < k");
  if (ext.taylor_order < k + 1) throw std::invalid_argument("insufficient derivative order for the remainder integral");
}

// Expansion terms and exact remainder factor in the eigenbasis:
// [phi(B),T]_mn = (phi(d_m) - phi(d_n)) T_mn, term_j = phi^(j)(d_m)(d_m - d_n)^j T_mn.
Matrix eigen_commutator(const Symbol& phi, const Eigen::VectorXd& d, const Matrix& Tt) {
  Matrix C(Tt.rows(), Tt.cols());
  for (Eigen::Index m = 0; m < d.size(); ++m)
    for (Eigen::Index n = 0; n < d.size(); ++n) C(m, n) = (phi.value(d[m]) - phi.value(d[n])) * Tt(m, n);
  return C;
}

}  // namespace

double operator_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()[0];
}

CommutatorExpansion hs_commutator_expansion(const AlmostAnalyticExtension& ext, const Matrix& B, const Matrix& T,
                                            int k, const Quadrature& quad) {
  check_expansion_order(ext, k);
  if (T.rows() != B.rows() || T.cols() != B.cols()) throw std::invalid_argument("T and B must have equal shape");
  const Eig e = hermitian_eig(B);
  const Matrix Tt = e.U.adjoint() * T * e.U;
  CommutatorExpansion out;
  out.commutator = from_eigenbasis(e, eigen_commutator(ext.phi, e.d, Tt));
  Matrix sum = Matrix::Zero(B.rows(), B.cols());
  for (int j = 1; j < k; ++j) {
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    Matrix term = sign / factorial(j) * functional_calculus(ext.phi, B, j) * ad_power(B, T, j);
    sum += term;
    out.terms.push_back(std::move(term));
  }
  const Nodes nodes = quadrature_nodes(ext, quad);
  const Matrix K = resolvent_kernel(nodes, e.d, e.d, k);
  Matrix It(Tt.rows(), Tt.cols());
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  for (Eigen::Index m = 0; m < e.d.size(); ++m)
    for (Eigen::Index n = 0; n < e.d.size(); ++n)
      It(m, n) = sign * K(m, n) * std::pow(e.d[m] - e.d[n], k) * Tt(m, n);
  out.remainder = from_eigenbasis(e, It);
  const double cnorm = operator_norm(out.commutator);
  const double defect = operator_norm(out.commutator - sum - out.remainder);
  out.closure_error = cnorm > 1e-12 * std::max(1.0, operator_norm(T)) ? defect / cnorm : defect;
  return out;
}

Matrix exact_remainder(const Symbol& phi, const Matrix& B, const Matrix& T, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("commutator expansion supports 1 <= k <= 3");
  const Eig e = hermitian_eig(B);
  const Matrix Tt = e.U.adjoint() * T * e.U;
  Matrix It(Tt.rows(), Tt.cols());
  for (Eigen::Index m = 0; m < e.d.size(); ++m) {
    const auto w = phi.taylor(e.d[m], k - 1);
    for (Eigen::Index n = 0; n < e.d.size(); ++n) {
      // phi(d_m) - phi(d_n) minus the first k-1 Taylor terms of phi(d_n) about d_m.
      const double h = e.d[n] - e.d[m];
      double factor = w[0] - phi.value(e.d[n]);
      double hp = 1.0;
      for (int j = 1; j < k; ++j) {
        hp *= h;
        factor += w[static_cast<std::size_t>(j)] * hp;
      }
      It(m, n) = factor * Tt(m, n);
    }
  }
  return from_eigenbasis(e, It);
}

void check_weight_admissible(double rho, int k, double s, double s_prime) {
  if (!(s_prime < 1.0)) throw std::invalid_argument("weighted remainder bound needs s' < 1");
  if (!(s < k)) throw std::invalid_argument("weighted remainder bound needs s < k");
  if (!(rho + s + s_prime < k)) throw std::invalid_argument("weighted remainder bound needs rho + s + s' < k");
}

double rest_weighted_bound(const Matrix& remainder, const Matrix& B, double s, double s_prime, double rho, int k,
                           bool allow_inadmissible) {
  if (!allow_inadmissible) check_weight_admissible(rho, k, s, s_prime);
  const Eig e = hermitian_eig(B);
  Matrix M = e.U.adjoint() * remainder * e.U;
  for (Eigen::Index m = 0; m < M.rows(); ++m)
    for (Eigen::Index n = 0; n < M.cols(); ++n)
      M(m, n) *= std::pow(japanese(e.d[m]), s) * std::pow(japanese(e.d[n]), s_prime);
  return operator_norm(M);
}

Matrix random_hermitian(int dimension, double radius, std::uint64_t seed) {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  Rng rng(seed);
  Matrix G(dimension, dimension);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix U = qr.householderQ();
  Eigen::VectorXcd d(dimension);
  for (int i = 0; i < dimension; ++i) d[i] = rng.uniform(-radius, radius);
  Matrix B = U * d.asDiagonal() * U.adjoint();
  return 0.5 * (B + B.adjoint());
}

WeightedTrend weighted_trend(const Symbol& phi, int k, double s, double s_prime, const std::vector<double>& radii,
                             std::uint64_t seed, bool allow_inadmissible) {
  if (!allow_inadmissible) check_weight_admissible(phi.rho, k, s, s_prime);
  WeightedTrend out;
  out.s = s;
  out.s_prime = s_prime;
  Rng rng(seed);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("spectral radii must be positive");
    const int n = std::clamp(static_cast<int>(std::lround(12.0 * r)), 2, 512);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = rng.uniform(-r, r);
    std::sort(d.data(), d.data() + n);
    Matrix B = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) B(i, i) = d[i];
    Matrix T(n, n);
    for (int m = 0; m < n; ++m) {
      T(m, m) = rng.normal();
      for (int c = m + 1; c < n; ++c) {
        const double h = d[m] - d[c];
        T(m, c) = rng.complex_normal() * std::exp(-0.5 * h * h);
        T(c, m) = std::conj(T(m, c));
      }
    }
    const Matrix I = exact_remainder(phi, B, T, k);
    const double norm = rest_weighted_bound(I, B, s, s_prime, phi.rho, k, true);
    out.points.push_back({r, n, norm});
    lo = std::min(lo, norm);
    hi = std::max(hi, norm);
  }
  out.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

double quadrature_doubling_ratio(const AlmostAnalyticExtension& ext, const Matrix& B, const Quadrature& quad) {
  const Matrix exact = functional_calculus(ext.phi, B);
  const double coarse = operator_norm(hs_apply(ext, B, quad) - exact);
  const double fine = operator_norm(hs_apply(ext, B, quad.doubled()) - exact);
  return fine > 0.0 ? coarse / fine : std::numeric_limits<double>::infinity();
}

HsDemoConfig hs_demo_config_from_json(const json& j) {
  static const std::set<std::string> known{"phi", "k", "dimension", "radius", "s", "s_prime",
                                           "radii", "allow_inadmissible", "seed", "quadrature"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("hs demo: unknown field '" + key + "'");
  HsDemoConfig c;
  if (j.contains("phi")) c.phi = j.at("phi");
  c.k = j.value("k", c.k);
  c.dimension = j.value("dimension", c.dimension);
  c.radius = j.value("radius", c.radius);
  c.s = j.value("s", c.s);
  c.s_prime = j.value("s_prime", c.s_prime);
  c.radii = j.value("radii", c.radii);
  c.allow_inadmissible = j.value("allow_inadmissible", c.allow_inadmissible);
  c.seed = j.value("seed", c.seed);
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    c.quadrature.nx = q.value("nx", c.quadrature.nx);
    c.quadrature.ny = q.value("ny", c.quadrature.ny);
    c.quadrature.s_max = q.value("s_max", c.quadrature.s_max);
  }
  return c;
}

json run_hs_demo(const HsDemoConfig& config) {
  const Symbol phi = symbol_from_json(config.phi);
  const AlmostAnalyticExtension ext = build_extension(phi);
  const Matrix B = random_hermitian(config.dimension, config.radius, config.seed);
  const Matrix T = random_hermitian(config.dimension, 1.0, config.seed + 1);
  const CommutatorExpansion ex = hs_commutator_expansion(ext, B, T, config.k, config.quadrature);
  const WeightedTrend trend =
      weighted_trend(phi, config.k, config.s, config.s_prime, config.radii, config.seed, config.allow_inadmissible);
  json points = json::array();
  for (const auto& p : trend.points) points.push_back({{"radius", p.radius}, {"dimension", p.dimension}, {"norm", p.norm}});
  return {{"phi", phi.name},
          {"rho", phi.rho},
          {"k", config.k},
          {"closure_error", ex.closure_error},
          {"weighted_trend", {{"s", trend.s}, {"s_prime", trend.s_prime}, {"points", points}, {"spread", trend.spread}}}};
}

}  // namespace lapkit
