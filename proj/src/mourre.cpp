#include "lapkit/mourre.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "lapkit/commutators.hpp"
#include "lapkit/states.hpp"

namespace lapkit {

using nlohmann::json;

namespace {

constexpr int kMinDimension = 8;
constexpr double kSkip = 1e-14;

double min_eigenvalue(const Matrix& G) {
  if (G.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs_eigenvalue(const Matrix& G) {
  if (G.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Matrix gram(const LinearMap& X, const std::vector<Vector>& basis) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  Matrix G(m, m);
  Vector xu;
  for (Eigen::Index j = 0; j < m; ++j) {
    X.apply(basis[static_cast<std::size_t>(j)], xu);
    for (Eigen::Index i = 0; i < m; ++i) G(i, j) = inner(X.grid(), basis[static_cast<std::size_t>(i)], xu);
  }
  return 0.5 * (G + G.adjoint());
}

Eigen::VectorXd pencil_eigenvalues(const Matrix& G, const Matrix& B, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> eb(B);
  const Eigen::VectorXd b = eb.eigenvalues();
  const double top = b.size() ? b.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < b.size(); ++k)
    if (b[k] > cutoff * top && b[k] > 0.0) keep.push_back(k);
  const auto r = static_cast<Eigen::Index>(keep.size());
  if (r == 0) return Eigen::VectorXd();
  Matrix W(G.rows(), r);
  for (Eigen::Index c = 0; c < r; ++c) W.col(c) = eb.eigenvectors().col(keep[c]) / std::sqrt(b[keep[c]]);
  Matrix T = W.adjoint() * G * W;
  T = 0.5 * (T + T.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> et(T, Eigen::EigenvaluesOnly);
  return et.eigenvalues();
}

std::pair<Verdict, std::vector<std::string>> certificate_verdict(const MourreCertificate& c) {
  std::vector<std::string> fails, open;
  if (c.dimension < kMinDimension)
    open.push_back("subspace dimension " + std::to_string(c.dimension) + " < " + std::to_string(kMinDimension));
  if (!(c.gap >= -c.tol_gap)) fails.push_back("gap " + std::to_string(c.gap) + " below -tol_gap");
  if (!(c.injectivity > 0.0)) fails.push_back("S is not injective on the subspace");
  if (!(c.dissipativity >= -c.tol_gap)) fails.push_back("Im H has a negative direction");
  if (!std::isnan(c.im_commutator) && !(c.im_commutator >= -c.tol_gap))
    fails.push_back("c1 [Im H, iA] has a negative direction");
  for (auto [name, value] : {std::pair{"second-order constant", c.second_order_C}, std::pair{"B7 constant", c.b7_c}}) {
    if (std::isnan(value)) open.push_back(std::string(name) + " not estimated");
    else if (!std::isfinite(value)) fails.push_back(std::string(name) + " is infinite");
  }
  if (!fails.empty()) {
    fails.insert(fails.end(), open.begin(), open.end());
    return {Verdict::Fail, fails};
  }
  if (!open.empty()) return {Verdict::Inconclusive, open};
  return {Verdict::Pass, {}};
}

void to_json(json& j, const MourreCertificate& c) {
  j = {{"c1", encode_double(c.c1)},
       {"S", c.s_tag},
       {"A", c.a_tag},
       {"grid", c.grid},
       {"dimension", c.dimension},
       {"gap", encode_double(c.gap)},
       {"injectivity_margin", encode_double(c.injectivity)},
       {"form_norm", encode_double(c.form_norm)},
       {"tol_gap", encode_double(c.tol_gap)},
       {"second_order_C", encode_double(c.second_order_C)},
       {"b7_c", encode_double(c.b7_c)},
       {"dissipativity_margin", encode_double(c.dissipativity)},
       {"im_commutator", encode_double(c.im_commutator)},
       {"verdict", to_string(c.verdict)},
       {"reasons", c.reasons}};
}

void from_json(const json& j, MourreCertificate& c) {
  c.c1 = decode_double(j.at("c1"));
  c.s_tag = j.at("S").get<std::string>();
  c.a_tag = j.at("A").get<std::string>();
  c.grid = j.at("grid").get<GridSpec>();
  c.dimension = j.at("dimension").get<int>();
  c.gap = decode_double(j.at("gap"));
  c.injectivity = decode_double(j.at("injectivity_margin"));
  c.form_norm = decode_double(j.at("form_norm"));
  c.tol_gap = decode_double(j.at("tol_gap"));
  c.second_order_C = decode_double(j.at("second_order_C"));
  c.b7_c = decode_double(j.at("b7_c"));
  c.dissipativity = decode_double(j.at("dissipativity_margin"));
  c.im_commutator = decode_double(j.at("im_commutator"));
  c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  c.reasons = j.at("reasons").get<std::vector<std::string>>();
}

MourreCertificate verify_weak_mourre(const Hamiltonian& H, const LinearMap& A, const LinearMap& S, double c1,
                                     const std::vector<Vector>& subspace, const MourreOptions& options) {
  if (!S.is_hermitian()) throw std::invalid_argument("verify_weak_mourre: S must be Hermitian");
  if (c1 < 0.0) throw std::invalid_argument("verify_weak_mourre: c1 must be >= 0");
  if (c1 > 0.0) {
    const bool dilation = options.kind ? *options.kind == ConjugateKind::Dilation : A.tag().rfind("A_D", 0) == 0;
    if (!dilation)
      throw std::invalid_argument("c1 > 0 needs the dilation conjugate: other conjugates do not reproduce Δ");
  }
  MourreCertificate cert;
  cert.c1 = c1;
  cert.s_tag = S.tag();
  cert.a_tag = A.tag();
  cert.grid = H.grid();
  cert.dimension = static_cast<int>(subspace.size());

  const LinearMap commutator = discrete_commutator(H.re, A, 1);
  const Matrix Gc = gram(commutator, subspace);
  const Matrix Gs = gram(S, subspace);
  Matrix form = Gc - Gs;
  if (c1 > 0.0) form -= c1 * gram(H.re, subspace);
  cert.gap = min_eigenvalue(form);
  cert.form_norm = max_abs_eigenvalue(Gc);
  cert.tol_gap = 1e-6 * std::max(1.0, cert.form_norm);
  cert.injectivity = min_eigenvalue(Gs);
  cert.dissipativity = H.has_imaginary ? min_eigenvalue(gram(H.im, subspace)) : 0.0;
  if (c1 > 0.0)
    cert.im_commutator = H.has_imaginary ? min_eigenvalue(c1 * gram(discrete_commutator(H.im, A, 1), subspace)) : 0.0;

  if (options.estimate_constants && !subspace.empty()) {
    const auto second = estimate_second_order_C(H.full(), A, S, subspace);
    cert.second_order_C = second.value();
    cert.b7_c = estimate_b7(H, A, options.b7_probes, options.seed).value;
  }
  std::tie(cert.verdict, cert.reasons) = certificate_verdict(cert);
  return cert;
}

RatioEstimate estimate_b7(const Hamiltonian& H, const LinearMap& A, int probes, std::uint64_t seed) {
  const GridSpec& grid = H.grid();
  const auto states = probe_states(grid, 2 * probes, seed);
  const LinearMap plus = H.full();
  RatioEstimate est;
  double best = 0.0;
  Vector hf, ag, af, hg;
  for (int k = 0; k < probes; ++k) {
    const Vector& f = states[static_cast<std::size_t>(2 * k)];
    const Vector& g = states[static_cast<std::size_t>(2 * k + 1)];
    plus.apply(g, hg);
    const double den = grid_norm(grid, f) * grid_norm(grid, hg + Complex(0.0, 1.0) * g);
    if (den < kSkip) {
      ++est.skipped;
      continue;
    }
    // H^- f = Re H f - i Im H f.
    H.re.apply(f, hf);
    if (H.has_imaginary) {
      Vector imf;
      H.im.apply(f, imf);
      hf -= Complex(0.0, 1.0) * imf;
    }
    A.apply(g, ag);
    A.apply(f, af);
    const double num = std::abs(inner(grid, hf, ag) - inner(grid, af, hg));
    best = std::max(best, num / den);
    ++est.used;
  }
  if (est.used > 0) est.value = best;
  return est;
}

SecondOrderEstimate estimate_second_order_C(const LinearMap& T, const LinearMap& A, const LinearMap& S,
                                            const std::vector<Vector>& probes) {
  const GridSpec& grid = T.grid();
  const LinearMap ad2 = discrete_commutator(T, A, 2);
  SecondOrderEstimate est;
  const auto m = static_cast<Eigen::Index>(probes.size());
  Matrix G(m, m), B(m, m);
  std::vector<Vector> adf(probes.size()), sf(probes.size());
  double best = -1.0;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    ad2.apply(probes[j], adf[j]);
    S.apply(probes[j], sf[j]);
    const double den = inner(grid, probes[j], sf[j]).real();
    const double scale = std::pow(grid_norm(grid, probes[j]), 2);
    if (den < kSkip * std::max(scale, 1e-300)) {
      ++est.skipped;
      continue;
    }
    best = std::max(best, std::abs(inner(grid, probes[j], adf[j])) / den);
  }
  if (best >= 0.0) est.individual = best;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      G(i, j) = inner(grid, probes[static_cast<std::size_t>(i)], adf[static_cast<std::size_t>(j)]);
      B(i, j) = inner(grid, probes[static_cast<std::size_t>(i)], sf[static_cast<std::size_t>(j)]);
    }
  const Eigen::VectorXd ev = pencil_eigenvalues(0.5 * (G + G.adjoint()), 0.5 * (B + B.adjoint()));
  if (ev.size() > 0) est.span = std::max(est.individual, ev.cwiseAbs().maxCoeff());
  return est;
}

CouplingScan empirical_coupling(const GridSpec& grid, const PotentialSpec& v, const ConjugateSpec& spec,
                                const std::vector<Vector>& subspace) {
  if (spec.kind != ConjugateKind::MomentumDecay)
    throw std::invalid_argument("empirical_coupling uses the momentum-decay conjugate");
  const LinearMap A = build_conjugate(grid, spec);
  const ScalarField v1 = v.v1;
  const LinearMap V = position_multiplier(grid, "V1", [v1](std::span<const double> x) {
    return Complex(v1.value(x).real(), 0.0);
  });
  const PointFn lambda = momentum_decay_symbol(grid, spec);
  const std::vector<int> coords = spec.active_coords;
  const bool radial = grid.is_radial();
  const LinearMap S = momentum_multiplier(grid, "Δλ(p)", [lambda, coords, radial](std::span<const double> xi) {
    double s = 0.0;
    for (std::size_t a = 0; a < xi.size(); ++a)
      if (radial || coords.empty() || std::find(coords.begin(), coords.end(), static_cast<int>(a)) != coords.end())
        s += xi[a] * xi[a];
    return s * lambda(xi);
  });
  const Matrix Gk = gram(discrete_commutator(V, A, 1), subspace);
  const Matrix Gs = gram(S, subspace);
  const Eigen::VectorXd ev = pencil_eigenvalues(-Gk, Gs);
  CouplingScan scan;
  scan.virial_constant = ev.size() ? ev.maxCoeff() : 0.0;
  scan.coupling_star = scan.virial_constant > 0.0 ? 1.0 / scan.virial_constant
                                                  : std::numeric_limits<double>::infinity();
  scan.second_order_C = estimate_second_order_C(V, A, S, subspace).value();
  return scan;
}

}  // namespace lapkit
