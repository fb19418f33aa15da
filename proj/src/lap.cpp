#include "lapkit/lap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

#include "lapkit/fourier.hpp"
#include "lapkit/random.hpp"

namespace lapkit {

using nlohmann::json;

std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Identity: return "identity";
    case WeightKind::Dilation: return "dilation";
    case WeightKind::PositionDecay: return "position-decay";
    case WeightKind::MomentumDecay: return "momentum-decay";
    case WeightKind::Partial: return "partial";
    case WeightKind::SInverseSqrt: return "s-inverse-sqrt";
    case WeightKind::SConjugate: return "s-conjugate";
  }
  return "identity";
}

WeightKind weight_kind_from_string(const std::string& s) {
  for (auto k : {WeightKind::Identity, WeightKind::Dilation, WeightKind::PositionDecay, WeightKind::MomentumDecay,
                 WeightKind::Partial, WeightKind::SInverseSqrt, WeightKind::SConjugate})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown weight kind '" + s + "'");
}

void to_json(json& j, const WeightChoice& w) {
  std::vector<int> coords;
  for (int c : w.coords) coords.push_back(c + 1);
  j = {{"kind", to_string(w.kind)}, {"mu", w.mu}, {"coords", coords}};
}

void from_json(const json& j, WeightChoice& w) {
  w = WeightChoice{};
  w.kind = weight_kind_from_string(j.at("kind").get<std::string>());
  w.mu = j.value("mu", 0.0);
  w.coords.clear();
  for (int c : j.value("coords", std::vector<int>{})) {
    if (c < 1) throw std::invalid_argument("weight coords are 1-based");
    w.coords.push_back(c - 1);
  }
}

namespace {

// Free S symbol for the S-weights.
PointFn free_s_symbol(const GridSpec& grid, const ConjugateSpec& conjugate) {
  switch (conjugate.kind) {
    case ConjugateKind::Dilation:
      return [](std::span<const double> xi) {
        double s = 0.0;
        for (double k : xi) s += k * k;
        return Complex(2.0 * s, 0.0);
      };
    case ConjugateKind::MomentumDecay: {
      const PointFn lambda = momentum_decay_symbol(grid, conjugate);
      return [lambda](std::span<const double> xi) {
        double s = 0.0;
        for (double k : xi) s += k * k;
        return 2.0 * s * lambda(xi);
      };
    }
    case ConjugateKind::PositionDecay: break;
  }
  throw std::invalid_argument("S-weights need a conjugate whose free commutator is diagonal in momentum");
}

LinearMap s_inverse_sqrt(const GridSpec& grid, const ConjugateSpec& conjugate) {
  const PointFn s = free_s_symbol(grid, conjugate);
  // Largest symbol value bounds the pseudo-inverse cutoff.
  std::vector<double> xi_max(static_cast<std::size_t>(grid.is_radial() ? grid.n : grid.axis_count()), 0.0);
  double top = 0.0;
  for (std::size_t a = 0; a < xi_max.size(); ++a) xi_max[a] = std::numbers::pi / grid.spacing();
  top = std::abs(s(xi_max));
  const double cutoff = 1e-10 * top;
  return momentum_multiplier(grid, "S^-1/2", [s, cutoff](std::span<const double> xi) {
    const double v = s(xi).real();
    return Complex(v > cutoff ? 1.0 / std::sqrt(v) : 0.0, 0.0);
  });
}

}  // namespace

WeightPair realize_weights(const GridSpec& grid, const WeightChoice& w, const ConjugateSpec& conjugate) {
  switch (w.kind) {
    case WeightKind::Identity: {
      const auto id = LinearMap::identity(grid);
      return {id, id};
    }
    case WeightKind::Dilation: {
      const auto q = inverse_abs_position(grid);
      return {q, q};
    }
    case WeightKind::PositionDecay: {
      const auto m = compose(japanese_position(grid, -0.5 * w.mu), inverse_abs_position(grid));
      return {m, m.adjoint()};
    }
    case WeightKind::MomentumDecay: {
      const auto m = compose(japanese_momentum(grid, -0.5 * w.mu), inverse_abs_position(grid));
      return {m, m.adjoint()};
    }
    case WeightKind::Partial: {
      if (grid.is_radial()) throw std::invalid_argument("partial weights need a full tensor grid");
      LinearMap m = inverse_abs_position(grid, w.coords);
      if (w.mu > 0.0) m = compose(japanese_momentum(grid, -0.5 * w.mu, w.coords), m);
      return {m, m.adjoint()};
    }
    case WeightKind::SInverseSqrt: {
      const auto s = s_inverse_sqrt(grid, conjugate);
      return {s, s};
    }
    case WeightKind::SConjugate: {
      const auto s = s_inverse_sqrt(grid, conjugate);
      return {compose(s, build_conjugate(grid, conjugate)), s};
    }
  }
  throw std::logic_error("unhandled weight kind");
}

// ---------------------------------------------------------------------------

namespace {

Vector kinetic_symbol(const GridSpec& grid) {
  Vector s(static_cast<Eigen::Index>(grid.size()));
  std::vector<double> xi(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.frequency_point(i, xi);
    double k2 = 0.0;
    for (double k : xi) k2 += k * k;
    s[static_cast<Eigen::Index>(i)] = k2;
  }
  return s;
}

// (H - z) and its adjoint (H^* - conj z), each with the free preconditioner.
struct ShiftedSystem {
  ApplyOp op, precond;
};

ShiftedSystem shifted(const Hamiltonian& H, Complex z, bool adjoint) {
  const GridSpec& grid = H.grid();
  const auto fft = Fourier::for_grid(grid);
  const Complex shift = adjoint ? std::conj(z) : z;
  Vector sym = kinetic_symbol(grid);
  for (Eigen::Index i = 0; i < sym.size(); ++i) {
    const Complex d = sym[i] - shift;
    sym[i] = std::abs(d) > 0.0 ? 1.0 / d : 0.0;
  }
  const double sign = adjoint ? -1.0 : 1.0;
  ShiftedSystem s;
  s.op = [H, shift, sign](const Vector& in, Vector& out) {
    H.re.apply(in, out);
    if (H.has_imaginary) {
      Vector im;
      H.im.apply(in, im);
      out += Complex(0.0, sign) * im;
    }
    out -= shift * in;
  };
  s.precond = [fft, sym](const Vector& in, Vector& out) { fft->multiply(sym, in, out); };
  return s;
}

}  // namespace

ResolventNorm weighted_resolvent_norm(const Hamiltonian& H, double lambda, double eta, const LinearMap& Wl,
                                      const LinearMap& Wr, const SolverSettings& solver, const NormSettings& norm,
                                      bool adjoint_first) {
  if (!(eta > 0.0)) throw std::invalid_argument("weighted_resolvent_norm needs eta > 0");
  const GridSpec& grid = H.grid();
  // R = (H - lambda + i eta)^{-1} = (H - z)^{-1} with z = lambda - i eta.
  const Complex z(lambda, -eta);
  const ShiftedSystem fwd = shifted(H, z, false), adj = shifted(H, z, true);
  ResolventNorm res;
  auto solve = [&](const ShiftedSystem& sys, const Vector& b) {
    const SolveResult r = gmres(sys.op, sys.precond, b, solver);
    res.iterations += r.iterations;
    res.restarts += r.restarts;
    res.residual = std::max(res.residual, r.residual);
    if (!r.converged) res.converged = false;
    return r.x;
  };
  // M = Wl R Wr, M^* = Wr^* R^* Wl^*.
  auto apply_m = [&](const Vector& v) {
    Vector w, y;
    Wr.apply(v, w);
    Wl.apply(solve(fwd, w), y);
    return y;
  };
  auto apply_mstar = [&](const Vector& v) {
    Vector w, y;
    Wl.apply_adjoint(v, w);
    Wr.apply_adjoint(solve(adj, w), y);
    return y;
  };
  // Power iteration on K = M^*M (or MM^*) with Rayleigh-Ritz over all
  // iterates, i.e. Lanczos with full reorthogonalization: the same K-applies
  // as plain power iteration, but the top Ritz value converges at the
  // Chebyshev rate instead of the gap ratio.
  auto apply_k = [&](const Vector& v) {
    Vector u = adjoint_first ? apply_m(apply_mstar(v)) : apply_mstar(apply_m(v));
    project_symmetry(grid, u);
    return u;
  };
  Rng rng(norm.seed);
  Vector v = random_vector(grid.size(), rng);
  project_symmetry(grid, v);
  v /= grid_norm(grid, v);
  std::vector<Vector> basis{v};
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(norm.steps + 1, norm.steps + 1);
  double previous = -1.0;
  for (int k = 0; k < norm.steps; ++k) {
    Vector u = apply_k(basis.back());
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const Complex h = inner(grid, basis[j], u);
        u -= h * basis[j];
        T(static_cast<Eigen::Index>(j), k) += h.real();
      }
    const double beta = grid_norm(grid, u);
    const Eigen::MatrixXd Tk = T.topLeftCorner(k + 1, k + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Tk + Tk.transpose()), Eigen::EigenvaluesOnly);
    const double top = std::max(0.0, es.eigenvalues()[k]);
    res.norm = std::sqrt(top);
    res.power_steps = k + 1;
    if (beta <= 1e-14 * std::max(top, 1e-300)) break;
    if (previous > 0.0 && std::abs(top - previous) <= norm.stagnation * top) break;
    previous = top;
    T(k + 1, k) = beta;
    basis.push_back(u / beta);
  }
  return res;
}

// ---------------------------------------------------------------------------

void SweepPlan::validate() const {
  if (etas.empty()) throw std::invalid_argument("sweep needs at least one eta");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0)) throw std::invalid_argument("eta ladder must be positive");
    if (i > 0 && !(etas[i] < etas[i - 1])) throw std::invalid_argument("eta ladder must be strictly decreasing");
  }
  for (double l : lambdas)
    if (!std::isfinite(l)) throw std::invalid_argument("lambda grid must be finite");
  if (!(threshold > 1.0)) throw std::invalid_argument("blow-up threshold must exceed 1");
}

void to_json(json& j, const SweepPlan& p) {
  j = {{"lambdas", p.lambdas},
       {"etas", p.etas},
       {"weights", p.weights},
       {"solver", {{"max_iterations", p.solver.max_iterations}, {"restart", p.solver.restart}, {"tol", p.solver.tol}}},
       {"norm", {{"steps", p.norm.steps}, {"seed", p.norm.seed}, {"stagnation", p.norm.stagnation}}},
       {"threshold", p.threshold}};
}

void from_json(const json& j, SweepPlan& p) {
  p = SweepPlan{};
  p.lambdas = j.value("lambdas", std::vector<double>{});
  if (j.contains("etas")) p.etas = j.at("etas").get<std::vector<double>>();
  if (j.contains("weights")) p.weights = j.at("weights").get<WeightChoice>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    p.solver.max_iterations = s.value("max_iterations", p.solver.max_iterations);
    p.solver.restart = s.value("restart", p.solver.restart);
    p.solver.tol = s.value("tol", p.solver.tol);
  }
  if (j.contains("norm")) {
    const auto& s = j.at("norm");
    p.norm.steps = s.value("steps", p.norm.steps);
    p.norm.seed = s.value("seed", p.norm.seed);
    p.norm.stagnation = s.value("stagnation", p.norm.stagnation);
  }
  p.threshold = j.value("threshold", p.threshold);
}

void to_json(json& j, const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"lambda", row.lambda}, {"eta", row.eta}, {"norm", encode_double(row.norm)},
                    {"iters", row.iterations}, {"residual", encode_double(row.residual)}, {"valid", row.valid}});
  json trends = json::array();
  for (const auto& t : r.trends)
    trends.push_back({{"lambda", t.lambda}, {"ratio", encode_double(t.ratio)}, {"sup_norm", encode_double(t.sup_norm)},
                      {"verdict", t.verdict}});
  j = {{"rows", rows},
       {"trends", trends},
       {"global_sup", encode_double(r.global_sup)},
       {"verdict", to_string(r.verdict)},
       {"invalid_lambdas", r.invalid_lambdas},
       {"blow_up_lambdas", r.blow_up_lambdas}};
}

void from_json(const json& j, SweepResult& r) {
  r = SweepResult{};
  for (const auto& row : j.at("rows"))
    r.rows.push_back({row.at("lambda").get<double>(), row.at("eta").get<double>(), decode_double(row.at("norm")),
                      row.at("iters").get<int>(), decode_double(row.at("residual")), row.at("valid").get<bool>()});
  for (const auto& t : j.at("trends"))
    r.trends.push_back({t.at("lambda").get<double>(), decode_double(t.at("ratio")), decode_double(t.at("sup_norm")),
                        t.at("verdict").get<std::string>()});
  r.global_sup = decode_double(j.at("global_sup"));
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  r.invalid_lambdas = j.at("invalid_lambdas").get<std::vector<double>>();
  r.blow_up_lambdas = j.at("blow_up_lambdas").get<std::vector<double>>();
}

void assign_verdicts(SweepResult& r, double threshold, const std::vector<double>& etas) {
  r.trends.clear();
  r.invalid_lambdas.clear();
  r.blow_up_lambdas.clear();
  r.global_sup = 0.0;
  const std::size_t per = etas.size();
  for (std::size_t start = 0; start + per <= r.rows.size(); start += per) {
    LambdaTrend t;
    t.lambda = r.rows[start].lambda;
    bool valid = true;
    for (std::size_t e = 0; e < per; ++e) {
      const auto& row = r.rows[start + e];
      valid = valid && row.valid;
      if (row.valid) t.sup_norm = std::max(t.sup_norm, row.norm);
    }
    if (per >= 2) {
      const auto& fine = r.rows[start + per - 1];
      const auto& coarse = r.rows[start + per - 2];
      t.ratio = fine.valid && coarse.valid && coarse.norm > 0.0 ? fine.norm / coarse.norm
                                                                : std::numeric_limits<double>::quiet_NaN();
    } else {
      t.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    if (!valid) {
      t.verdict = "invalid";
      r.invalid_lambdas.push_back(t.lambda);
    } else if (t.ratio > threshold) {
      t.verdict = "blow-up";
      r.blow_up_lambdas.push_back(t.lambda);
    } else {
      t.verdict = "bounded";
    }
    r.global_sup = std::max(r.global_sup, t.sup_norm);
    r.trends.push_back(t);
  }
  if (!r.invalid_lambdas.empty()) r.verdict = Verdict::Inconclusive;
  else if (!r.blow_up_lambdas.empty()) r.verdict = Verdict::Fail;
  else r.verdict = Verdict::Pass;
}

SweepResult run_sweep(const Hamiltonian& H, const SweepPlan& plan, const ConjugateSpec& conjugate) {
  plan.validate();
  const WeightPair w = realize_weights(H.grid(), plan.weights, conjugate);
  SweepResult result;
  const std::size_t per = plan.etas.size();
  result.rows.resize(plan.lambdas.size() * per);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t li = next++; li < plan.lambdas.size(); li = next++) {
      for (std::size_t e = 0; e < per; ++e) {
        const double lambda = plan.lambdas[li], eta = plan.etas[e];
        const ResolventNorm r = weighted_resolvent_norm(H, lambda, eta, w.left, w.right, plan.solver, plan.norm);
        SweepRow& row = result.rows[li * per + e];
        row.lambda = lambda;
        row.eta = eta;
        row.norm = r.norm;
        row.iterations = r.iterations;
        row.residual = r.residual;
        row.valid = r.converged && r.residual <= plan.solver.tol;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(plan.threads, static_cast<int>(plan.lambdas.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  assign_verdicts(result, plan.threshold, plan.etas);
  return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

}  // namespace

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  auto os = open_csv(path);
  os << "lambda,eta,norm,iters,residual,valid\n";
  for (const auto& row : r.rows)
    os << row.lambda << ',' << row.eta << ',' << row.norm << ',' << row.iterations << ',' << row.residual << ','
       << (row.valid ? 1 : 0) << '\n';
}

void write_sup_csv(const SweepResult& r, const std::filesystem::path& path) {
  auto os = open_csv(path);
  os << "lambda,sup_norm,ratio,verdict\n";
  for (const auto& t : r.trends) os << t.lambda << ',' << t.sup_norm << ',' << t.ratio << ',' << t.verdict << '\n';
}

// ---------------------------------------------------------------------------

bool EigenScan::has_bound_state_in(double lo, double hi) const {
  for (const auto& p : pairs)
    if (p.bound_state && p.value.real() >= lo && p.value.real() <= hi) return true;
  return false;
}

void to_json(json& j, const EigenScan& s) {
  json pairs = json::array();
  for (const auto& p : s.pairs)
    pairs.push_back({{"re", p.value.real()}, {"im", p.value.imag()}, {"residual", encode_double(p.residual)},
                     {"outer_mass", p.outer_mass}, {"bound_state", p.bound_state}});
  j = {{"pairs", pairs}, {"converged", s.converged}, {"iterations", s.iterations}};
}

void from_json(const json& j, EigenScan& s) {
  s = EigenScan{};
  for (const auto& p : j.at("pairs"))
    s.pairs.push_back({{p.at("re").get<double>(), p.at("im").get<double>()}, decode_double(p.at("residual")),
                       p.at("outer_mass").get<double>(), p.at("bound_state").get<bool>()});
  s.converged = j.at("converged").get<bool>();
  s.iterations = j.at("iterations").get<int>();
}

EigenScan lowest_eigenvalues(const Hamiltonian& H, int m, const EigenSettings& settings) {
  if (m < 1 || m > 20) throw std::invalid_argument("lowest_eigenvalues needs 1 <= m <= 20");
  const GridSpec& grid = H.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  // Re H - Δ is the multiplier V1, so applying it to the constant state
  // reads off V1 at every node; Δ >= 0 puts the spectrum above min V1.
  const Vector ones = Vector::Ones(n);
  Vector v1;
  (H.re - laplacian(grid)).apply(ones, v1);
  double vmin = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) vmin = std::min(vmin, v1[i].real());
  const double sigma = vmin - 1.0;
  const ShiftedSystem sys = shifted(H, Complex(sigma, 0.0), false);
  SolverSettings solver;
  solver.tol = std::min(1e-11, settings.tol * 1e-2);
  const int b = m + settings.extra_vectors;
  const auto B = static_cast<Eigen::Index>(std::min<std::size_t>(b, grid.size()));
  Rng rng(settings.seed);
  Matrix X(n, B);
  for (Eigen::Index c = 0; c < B; ++c) {
    Vector v = random_vector(grid.size(), rng);
    project_symmetry(grid, v);
    X.col(c) = v;
  }
  const LinearMap full = H.full();
  EigenScan scan;
  Eigen::VectorXcd theta;
  Matrix ritz;
  std::vector<double> resid(static_cast<std::size_t>(B), std::numeric_limits<double>::infinity());
  for (int it = 0; it < settings.max_iterations; ++it) {
    Matrix Y(n, B);
    for (Eigen::Index c = 0; c < B; ++c) {
      Vector col = X.col(c);
      Y.col(c) = gmres(sys.op, sys.precond, col, solver).x;
    }
    Eigen::HouseholderQR<Matrix> qr(Y);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, B);
    Matrix HQ(n, B);
    for (Eigen::Index c = 0; c < B; ++c) {
      Vector col = Q.col(c), out;
      project_symmetry(grid, col);
      Q.col(c) = col;
      full.apply(col, out);
      HQ.col(c) = out;
    }
    const Matrix T = Q.adjoint() * HQ;
    Eigen::VectorXcd vals;
    Matrix vecs;
    if (!H.has_imaginary) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (T + T.adjoint()));
      vals = es.eigenvalues().cast<Complex>();
      vecs = es.eigenvectors();
    } else {
      Eigen::ComplexEigenSolver<Matrix> es(T);
      vals = es.eigenvalues();
      vecs = es.eigenvectors();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(B));
    for (Eigen::Index k = 0; k < B; ++k) order[static_cast<std::size_t>(k)] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index c) { return vals[a].real() < vals[c].real(); });
    theta.resize(B);
    ritz.resize(n, B);
    for (Eigen::Index k = 0; k < B; ++k) {
      theta[k] = vals[order[static_cast<std::size_t>(k)]];
      ritz.col(k) = Q * vecs.col(order[static_cast<std::size_t>(k)]);
      ritz.col(k).normalize();
    }
    bool done = true;
    for (Eigen::Index k = 0; k < m && k < B; ++k) {
      Vector col = ritz.col(k), out;
      full.apply(col, out);
      resid[static_cast<std::size_t>(k)] = (out - theta[k] * col).norm() / std::max(1.0, std::abs(theta[k]));
      if (resid[static_cast<std::size_t>(k)] > settings.tol) done = false;
    }
    X = ritz;
    scan.iterations = it + 1;
    if (done) {
      scan.converged = true;
      break;
    }
  }
  std::vector<double> radius(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) radius[i] = node_radius(grid, i);
  for (Eigen::Index k = 0; k < m && k < B; ++k) {
    EigenPair p;
    p.value = theta[k];
    p.residual = resid[static_cast<std::size_t>(k)];
    double outer = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::norm(ritz(i, k));
      total += a;
      if (radius[static_cast<std::size_t>(i)] > 0.5 * grid.L) outer += a;
    }
    p.outer_mass = total > 0.0 ? outer / total : 0.0;
    // Negative real parts lie below the box spectrum of Δ and are genuine.
    p.bound_state = p.value.real() < -settings.tol || p.outer_mass < settings.outer_mass_limit;
    scan.pairs.push_back(p);
  }
  return scan;
}

}  // namespace lapkit
