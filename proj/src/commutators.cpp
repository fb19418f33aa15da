#include "lapkit/commutators.hpp"

#include <cmath>
#include <numbers>

#include "lapkit/operators.hpp"
#include "lapkit/states.hpp"

namespace lapkit {

namespace {

// Active axes (all when the spec leaves them empty; radial grids have one line axis).
std::vector<int> active_axes(const GridSpec& grid, const ConjugateSpec& spec) {
  if (grid.is_radial() || spec.active_coords.empty()) {
    std::vector<int> all(static_cast<std::size_t>(grid.axis_count()));
    for (int a = 0; a < grid.axis_count(); ++a) all[static_cast<std::size_t>(a)] = a;
    return all;
  }
  return spec.active_coords;
}

// Mask of active components for an evaluation point (radial points carry r in slot 0).
std::vector<bool> active_mask(const GridSpec& grid, const ConjugateSpec& spec, std::size_t dim) {
  std::vector<bool> m(dim, grid.is_radial() || spec.active_coords.empty());
  if (!grid.is_radial())
    for (int c : spec.active_coords) m[static_cast<std::size_t>(c)] = true;
  return m;
}

bool line_mode(const GridSpec& grid) { return grid.axis_count() == 1; }

// Decay factor g = <x_K>^{-mu}, and |x_K|^2.
struct Decay {
  double g;
  double r2;
  double J2;
};

Decay decay_at(std::span<const double> x, const std::vector<bool>& mask, double mu) {
  double r2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (mask[j]) r2 += x[j] * x[j];
  return {std::pow(1.0 + r2, -0.5 * mu), r2, 1.0 + r2};
}

void require_gradient(const ScalarField& V) {
  if (!V.has_gradient())
    throw std::invalid_argument("analytic commutator for '" + V.tag + "' needs a closed-form gradient");
}

void require_hessian(const ScalarField& V) {
  if (!V.has_hessian())
    throw std::invalid_argument("analytic commutator for '" + V.tag + "' needs a closed-form Hessian");
}

// x_K . grad V and x_K^T Hess V x_K at an evaluation point.
struct Radials {
  Complex first;
  Complex second;
};

Radials radial_derivatives(const ScalarField& V, std::span<const double> x, const std::vector<bool>& mask,
                           bool need_second) {
  const std::size_t n = x.size();
  std::vector<Complex> g(n), h(need_second ? n * n : 0);
  V.gradient(x, g);
  Radials out{0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j)
    if (mask[j]) out.first += x[j] * g[j];
  if (need_second) {
    V.hessian(x, h);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (mask[j] && mask[k]) out.second += x[j] * x[k] * h[j * n + k];
  }
  return out;
}

// The centrifugal term of a radial grid as a field on the evaluation point.
std::optional<ScalarField> centrifugal_field(const GridSpec& grid) {
  if (!grid.is_radial() || grid.n == 3) return std::nullopt;
  const double c = 0.25 * (grid.n - 1) * (grid.n - 3);
  const double e2 = grid.epsilon0 * grid.epsilon0;
  return ScalarField::radial(
      "centrifugal", [c, e2](double r) { return Complex(c / (r * r + e2), 0.0); },
      [c, e2](double r) { return Complex(-2.0 * c * r / std::pow(r * r + e2, 2), 0.0); },
      [c, e2](double r) { return Complex(c * (6.0 * r * r - 2.0 * e2) / std::pow(r * r + e2, 3), 0.0); });
}

LinearMap lap_subset(const GridSpec& grid, const std::vector<int>& axes) {
  // Kinetic part only; a radial centrifugal term is handled as a potential.
  return kinetic_energy(grid, static_cast<int>(axes.size()) == grid.axis_count() ? std::vector<int>{} : axes);
}

LinearMap potential_commutator(const GridSpec& grid, const ScalarField& V, const ConjugateSpec& spec, int order,
                               std::vector<Identity>& used) {
  const double mu = spec.mu;
  require_gradient(V);
  const std::size_t dim = grid.is_radial() ? static_cast<std::size_t>(grid.n)
                                           : static_cast<std::size_t>(grid.axis_count());
  const std::vector<bool> mask = active_mask(grid, spec, dim);
  const bool decay = spec.kind == ConjugateKind::PositionDecay && mu != 0.0;
  if (spec.kind == ConjugateKind::MomentumDecay)
    throw NoClosedForm("no closed form for [V, iA_u]; use the discrete commutator");
  if (order == 1) {
    used.push_back(decay ? Identity::PotentialPositionDecay : Identity::PotentialDilation);
    return position_multiplier(grid, decay ? "-F.grad V" : "-q.grad V", [&](std::span<const double> x) {
      const Radials r = radial_derivatives(V, x, mask, false);
      return -(decay ? decay_at(x, mask, mu).g : 1.0) * r.first;
    });
  }
  require_hessian(V);
  if (!decay) {
    used.push_back(Identity::PotentialDilation2Multiplier);
    return position_multiplier(grid, "(q.grad)^2 V", [&](std::span<const double> x) {
      const Radials r = radial_derivatives(V, x, mask, true);
      return r.first + r.second;
    });
  }
  used.push_back(Identity::PotentialPositionDecay2);
  return position_multiplier(grid, "(F.grad)^2 V", [&](std::span<const double> x) {
    const Radials r = radial_derivatives(V, x, mask, true);
    const Decay d = decay_at(x, mask, mu);
    const double dfdx = d.g - mu * d.r2 * std::pow(d.J2, -0.5 * mu - 1.0);
    return d.g * dfdx * r.first + d.g * d.g * r.second;
  });
}

// -iG(q.p) + i(p.q)G - |K| G, the displayed operator form of [[V,iA_D],iA_D].
LinearMap dilation_second_order_form(const GridSpec& grid, const ScalarField& V, const ConjugateSpec& spec) {
  require_gradient(V);
  const std::vector<int> axes = active_axes(grid, spec);
  const std::size_t dim = grid.is_radial() ? static_cast<std::size_t>(grid.n)
                                           : static_cast<std::size_t>(grid.axis_count());
  const std::vector<bool> mask = active_mask(grid, spec, dim);
  const LinearMap G = position_multiplier(grid, "q.grad V", [&](std::span<const double> x) {
    return radial_derivatives(V, x, mask, false).first;
  });
  LinearMap qp = LinearMap::zero(grid), pq = LinearMap::zero(grid);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const LinearMap q = coordinate(grid, axes[i]), p = momentum(grid, axes[i]);
    qp = i == 0 ? compose(q, p) : qp + compose(q, p);
    pq = i == 0 ? compose(p, q) : pq + compose(p, q);
  }
  const double k = static_cast<double>(axes.size());
  const LinearMap form = scale(Complex(0, -1), compose(G, qp)) + scale(Complex(0, 1), compose(pq, G)) - scale(k, G);
  // The combination is Hermitian; flag it so adjoint tests use it as such.
  return LinearMap::hermitian(grid, "-iG(q.p)+i(p.q)G-nG", [form](const Vector& in, Vector& out) {
    form.apply(in, out);
  });
}

LinearMap laplacian_commutator(const GridSpec& grid, const ConjugateSpec& spec, int order, bool factored,
                               std::vector<Identity>& used) {
  const std::vector<int> axes = active_axes(grid, spec);
  const double mu = spec.mu;
  LinearMap kinetic = LinearMap::zero(grid);
  const ConjugateKind kind =
      spec.kind == ConjugateKind::PositionDecay && mu == 0.0 ? ConjugateKind::Dilation : spec.kind;
  switch (kind) {
    case ConjugateKind::Dilation:
      used.push_back(order == 1 ? Identity::LaplacianDilation : Identity::LaplacianDilation2);
      kinetic = scale(order == 1 ? 2.0 : 4.0, lap_subset(grid, axes));
      break;
    case ConjugateKind::PositionDecay: {
      if (factored) {
        if (order != 1 || !spec.active_coords.empty() || grid.is_radial())
          throw NoClosedForm("factored position-decay form exists only at first order on full tensor grids");
        used.push_back(Identity::LaplacianPositionFactored);
        const LinearMap AD = build_conjugate(grid, ConjugateSpec{});
        const LinearMap inner = lap_subset(grid, axes) - scale(mu, sandwich(AD, japanese_position(grid, -2.0)));
        kinetic = scale(2.0, sandwich(japanese_position(grid, -0.5 * mu), inner));
        break;
      }
      if (line_mode(grid)) {
        const LinearMap p = momentum(grid, 0);
        Vector d1(static_cast<Eigen::Index>(grid.size())), tail(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double x = grid.node(static_cast<int>(i));
          const FProfile f = f_derivatives(mu, x);
          const auto I = static_cast<Eigen::Index>(i);
          if (order == 1) {
            d1[I] = f.d1;
            tail[I] = -0.5 * f.d3;
          } else {
            d1[I] = 2.0 * f.d1 * f.d1 - f.F * f.d2;
            tail[I] = -0.5 * (f.d3 * f.d1 + f.d2 * f.d2);
          }
        }
        const LinearMap mid = LinearMap::diagonal(grid, "F'", std::move(d1));
        const LinearMap low = LinearMap::diagonal(grid, "F'''", std::move(tail));
        if (order == 1) {
          used.push_back(Identity::LaplacianPositionDecay);
          kinetic = scale(2.0, sandwich(p, mid)) + low;
        } else {
          used.push_back(Identity::LaplacianPositionDecay2);
          Vector quartic(static_cast<Eigen::Index>(grid.size()));
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.node(static_cast<int>(i));
            const FProfile f = f_derivatives(mu, x);
            quartic[static_cast<Eigen::Index>(i)] = 0.5 * f.F * f.d4;
          }
          kinetic = scale(2.0, sandwich(p, mid) + low) + LinearMap::diagonal(grid, "F F''''", std::move(quartic));
        }
        break;
      }
      if (order != 1) throw NoClosedForm("no closed second-order position-decay form for n-D tensor grids");
      used.push_back(Identity::LaplacianPositionDecay);
      const std::size_t dim = static_cast<std::size_t>(grid.axis_count());
      const std::vector<bool> mask = active_mask(grid, spec, dim);
      const double nk = static_cast<double>(axes.size());
      LinearMap sum = LinearMap::zero(grid);
      bool first = true;
      for (int j : axes)
        for (int k : axes) {
          const LinearMap m = position_multiplier(grid, "dF", [&, j, k](std::span<const double> x) {
            const Decay d = decay_at(x, mask, mu);
            const double cross = x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k)];
            return Complex((j == k ? d.g : 0.0) - mu * cross * std::pow(d.J2, -0.5 * mu - 1.0), 0.0);
          });
          const LinearMap term = compose(momentum(grid, j), compose(m, momentum(grid, k)));
          sum = first ? term : sum + term;
          first = false;
        }
      auto lap_of_power = [nk](double s, double J2) {
        return s * (s + 2.0 - nk) * std::pow(J2, -0.5 * s - 1.0) - s * (s + 2.0) * std::pow(J2, -0.5 * s - 2.0);
      };
      const LinearMap low = position_multiplier(grid, "lap div F", [&](std::span<const double> x) {
        const Decay d = decay_at(x, mask, mu);
        const double v = (nk - mu) * lap_of_power(mu, d.J2) + mu * lap_of_power(mu + 2.0, d.J2);
        return Complex(-0.5 * v, 0.0);
      });
      const LinearMap total = scale(2.0, sum) + low;
      kinetic = LinearMap::hermitian(grid, "[Δ,iA_F]", [total](const Vector& in, Vector& out) {
        total.apply(in, out);
      });
      break;
    }
    case ConjugateKind::MomentumDecay: {
      if (spec.momentum_symbol && order != 1)
        throw NoClosedForm("second-order momentum-decay form needs the default symbol");
      const PointFn lambda = momentum_decay_symbol(grid, spec);
      const std::size_t dim = grid.is_radial() ? static_cast<std::size_t>(grid.n)
                                               : static_cast<std::size_t>(grid.axis_count());
      const std::vector<bool> mask = active_mask(grid, spec, dim);
      if (order == 1) {
        used.push_back(Identity::LaplacianMomentumDecay);
        kinetic = momentum_multiplier(grid, "2Δλ(p)", [lambda, mask](std::span<const double> xi) {
          double s = 0.0;
          for (std::size_t j = 0; j < xi.size(); ++j)
            if (mask[j]) s += xi[j] * xi[j];
          return 2.0 * s * lambda(xi);
        });
      } else {
        used.push_back(Identity::LaplacianMomentumDecay2);
        kinetic = momentum_multiplier(grid, "λ ξ.∇(2|ξ|²λ)", [mu, mask](std::span<const double> xi) {
          double s = 0.0;
          for (std::size_t j = 0; j < xi.size(); ++j)
            if (mask[j]) s += xi[j] * xi[j];
          const double lam = std::pow(1.0 + s, -0.5 * mu);
          return Complex(lam * 2.0 * (2.0 * s * lam - mu * s * s * std::pow(1.0 + s, -0.5 * mu - 1.0)), 0.0);
        });
      }
      break;
    }
  }
  if (const auto c = centrifugal_field(grid)) {
    if (spec.kind == ConjugateKind::MomentumDecay)
      throw NoClosedForm("momentum-decay commutators on radial grids need n = 3");
    kinetic = kinetic + potential_commutator(grid, *c, spec, order, used);
  }
  return kinetic;
}

}  // namespace

std::string to_string(Identity id) {
  switch (id) {
    case Identity::LaplacianDilation: return "[Δ,iA_D]=2Δ";
    case Identity::LaplacianPositionDecay: return "[Δ,iA_F]=2pF'(q)p-F'''(q)/2";
    case Identity::LaplacianPositionFactored: return "[Δ,iA_F]~2<q>^(-μ/2)(Δ-μA_D<q>^(-2)A_D)<q>^(-μ/2)";
    case Identity::LaplacianMomentumDecay: return "[Δ,iA_u]=2Δλ(p)";
    case Identity::PotentialDilation: return "[V,iA_D]=-q·∇V";
    case Identity::PotentialPositionDecay: return "[V,iA_F]=-F(q)·∇V";
    case Identity::LaplacianDilation2: return "[[Δ,iA_D],iA_D]=4Δ";
    case Identity::PotentialDilation2: return "[[V,iA_D],iA_D]=-iG(q·p)+i(p·q)G-nG";
    case Identity::PotentialDilation2Multiplier: return "[[V,iA_D],iA_D]=(q·∇)²V";
    case Identity::LaplacianPositionDecay2: return "[[Δ,iA_F],iA_F]=2[p(2F'²-FF'')p-(F'''F'+F''²)/2]+FF''''/2";
    case Identity::PotentialPositionDecay2: return "[[V,iA_F],iA_F]=(F·∇)²V";
    case Identity::LaplacianMomentumDecay2: return "[[Δ,iA_u],iA_u]=λ(p)p·∇(2p²λ(p))";
  }
  return "?";
}

std::string CommutatorPair::tag() const {
  std::string s;
  for (std::size_t i = 0; i < identities.size(); ++i) s += (i ? " + " : "") + to_string(identities[i]);
  return s;
}

LinearMap discrete_commutator(const LinearMap& T, const LinearMap& A, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("discrete_commutator: order must be 1 or 2");
  if (!(T.grid() == A.grid())) throw std::invalid_argument("discrete_commutator: operators on different grids");
  auto fwd = [T, A](const Vector& in, Vector& out) {
    Vector t1, t2;
    A.apply(in, t1);
    T.apply(t1, out);
    T.apply(in, t1);
    A.apply(t1, t2);
    out = Complex(0, 1) * (out - t2);
  };
  // (i(TA - AT))^† = i(T^†A^† - A^†T^†).
  auto adj = [T, A](const Vector& in, Vector& out) {
    Vector t1, t2;
    A.apply_adjoint(in, t1);
    T.apply_adjoint(t1, out);
    T.apply_adjoint(in, t1);
    A.apply_adjoint(t1, t2);
    out = Complex(0, 1) * (out - t2);
  };
  const std::string tag = "[" + T.tag() + ",i" + A.tag() + "]";
  LinearMap first = T.is_hermitian() && A.is_hermitian() ? LinearMap::hermitian(T.grid(), tag, fwd)
                                                         : LinearMap(T.grid(), tag, fwd, adj, false);
  if (order == 1) return first;
  return discrete_commutator(first, A, 1);
}

LinearMap assemble_parts(const GridSpec& grid, const CommutatorParts& parts) {
  LinearMap T = LinearMap::zero(grid);
  bool any = false;
  if (parts.laplacian) {
    T = laplacian(grid);
    any = true;
  }
  if (parts.potential) {
    const ScalarField& V = *parts.potential;
    const LinearMap Vq = position_multiplier(grid, V.tag, V.value);
    T = any ? T + Vq : Vq;
    any = true;
  }
  return T;
}

LinearMap analytic_commutator(const GridSpec& grid, const CommutatorParts& parts, const ConjugateSpec& spec,
                              int order, std::vector<Identity>* used) {
  if (order != 1 && order != 2) throw std::invalid_argument("analytic_commutator: order must be 1 or 2");
  spec.validate(grid.n);
  std::vector<Identity> ids;
  LinearMap sum = LinearMap::zero(grid);
  bool any = false;
  if (parts.laplacian) {
    sum = laplacian_commutator(grid, spec, order, parts.factored, ids);
    any = true;
  }
  if (parts.potential) {
    LinearMap pc = LinearMap::zero(grid);
    if (order == 2 && spec.kind == ConjugateKind::Dilation) {
      ids.push_back(Identity::PotentialDilation2);
      pc = dilation_second_order_form(grid, *parts.potential, spec);
    } else if (order == 2 && spec.kind == ConjugateKind::PositionDecay && spec.mu == 0.0) {
      ids.push_back(Identity::PotentialDilation2);
      pc = dilation_second_order_form(grid, *parts.potential, spec);
    } else {
      pc = potential_commutator(grid, *parts.potential, spec, order, ids);
    }
    sum = any ? sum + pc : pc;
    any = true;
  }
  if (!any) throw std::invalid_argument("analytic_commutator: no parts given");
  if (used) *used = ids;
  std::string tag;
  for (std::size_t i = 0; i < ids.size(); ++i) tag += (i ? " + " : "") + to_string(ids[i]);
  return sum.with_tag(tag + " analytic");
}

CommutatorPair commutator_pair(const GridSpec& grid, const CommutatorParts& parts, const ConjugateSpec& spec,
                               int order) {
  std::vector<Identity> ids;
  LinearMap analytic = analytic_commutator(grid, parts, spec, order, &ids);
  const LinearMap T = assemble_parts(grid, parts);
  const LinearMap A = build_conjugate(grid, spec);
  return CommutatorPair{discrete_commutator(T, A, order).with_tag("[T,iA] discrete"), std::move(analytic),
                        std::move(ids)};
}

double cross_validate(const CommutatorPair& pair, const std::vector<Vector>& states, double eps) {
  if (states.empty()) throw std::invalid_argument("cross_validate: empty state list");
  const GridSpec& g = pair.discrete.grid();
  double worst = 0.0;
  for (const auto& f : states) {
    const Vector d = pair.discrete(f);
    const Vector a = pair.analytic(f);
    const double scale = std::max({grid_norm(g, d), grid_norm(g, a), eps});
    worst = std::max(worst, grid_norm(g, d - a) / scale);
  }
  return worst;
}

std::vector<double> regularity_probe(const LinearMap& T, const LinearMap& A, int kmax, int steps,
                                     std::uint64_t seed) {
  if (kmax < 1 || kmax > 3) throw std::invalid_argument("regularity_probe: kmax must be in 1..3");
  // Near Nyquist and at the periodic seam the discrete q, p stop being a
  // canonical pair, so the probe sees ad^p only through band * mask.
  const GridSpec& grid = T.grid();
  const Vector mask = interior_mask(grid);
  const LinearMap window(grid, "window",
                         [grid, mask](const Vector& in, Vector& out) {
                           out = in;
                           band_limit(grid, out, 0.5);
                           out = out.cwiseProduct(mask);
                         },
                         [grid, mask](const Vector& in, Vector& out) {
                           out = in.cwiseProduct(mask);
                           band_limit(grid, out, 0.5);
                         },
                         false);
  std::vector<double> norms;
  LinearMap ad = T;
  for (int p = 1; p <= kmax; ++p) {
    ad = discrete_commutator(ad, A, 1);
    norms.push_back(estimate_norm(compose(window.adjoint(), compose(ad, window)), steps, seed, 0.0).value);
  }
  return norms;
}

RegularityTrend regularity_trend(
    const GridSpec& grid, const std::function<std::pair<LinearMap, LinearMap>(const GridSpec&)>& build, int kmax,
    double growth_threshold) {
  GridSpec fine = grid;
  fine.N = 2 * grid.N;
  fine.mask_width = 2 * grid.mask_width;
  fine.epsilon0 = 0.5 * grid.epsilon0;
  fine.validate();
  RegularityTrend t;
  const auto [Tc, Ac] = build(grid);
  const auto [Tf, Af] = build(fine);
  t.coarse = regularity_probe(Tc, Ac, kmax);
  t.fine = regularity_probe(Tf, Af, kmax);
  for (std::size_t i = 0; i < t.coarse.size(); ++i) {
    t.ratio.push_back(t.coarse[i] > 0.0 ? t.fine[i] / t.coarse[i] : 1.0);
    t.growing.push_back(t.ratio.back() > growth_threshold);
  }
  return t;
}

}  // namespace lapkit
