#include "lapkit/conjugate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lapkit {

namespace {

std::vector<int> axes_of(const GridSpec& grid, const std::vector<int>& coords) {
  if (!coords.empty()) return coords;
  std::vector<int> all(static_cast<std::size_t>(grid.axis_count()));
  for (int a = 0; a < grid.axis_count(); ++a) all[static_cast<std::size_t>(a)] = a;
  return all;
}

double squared_subset(std::span<const double> x, const std::vector<int>& coords, bool radial) {
  double s = 0.0;
  if (coords.empty() || radial) {
    for (double v : x) s += v * v;
  } else {
    for (int c : coords) s += x[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
  }
  return s;
}

LinearMap dilation(const GridSpec& grid, const std::vector<int>& axes) {
  LinearMap sum = LinearMap::zero(grid);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const LinearMap term = symmetric_product(coordinate(grid, axes[i]), momentum(grid, axes[i]));
    sum = i == 0 ? term : sum + term;
  }
  return sum;
}

}  // namespace

std::string to_string(ConjugateKind k) {
  switch (k) {
    case ConjugateKind::Dilation: return "dilation";
    case ConjugateKind::PositionDecay: return "position-decay";
    case ConjugateKind::MomentumDecay: return "momentum-decay";
  }
  return "dilation";
}

ConjugateKind conjugate_kind_from_string(const std::string& s) {
  if (s == "dilation" || s == "A_D") return ConjugateKind::Dilation;
  if (s == "position-decay" || s == "A_F") return ConjugateKind::PositionDecay;
  if (s == "momentum-decay" || s == "A_u") return ConjugateKind::MomentumDecay;
  throw std::invalid_argument("unknown conjugate kind '" + s + "'");
}

double ConjugateSpec::position_decay_bound(int n) {
  if (n <= 2) return 1.0;
  const double r = 1.0 + static_cast<double>(n) / (n - 2);
  return 1.0 / (r * r);
}

void ConjugateSpec::validate(int n) const {
  if (!std::isfinite(mu) || mu < 0.0) throw std::invalid_argument("conjugate: mu must be finite and >= 0");
  for (int c : active_coords)
    if (c < 0 || c >= n) throw std::invalid_argument("conjugate: active coordinate out of range");
  if (allow_inadmissible) return;
  std::ostringstream err;
  err.precision(17);
  if (kind == ConjugateKind::PositionDecay) {
    const double bound = position_decay_bound(n);
    const bool ok = n >= 3 ? mu < bound : mu <= bound;
    if (!ok) {
      err << "conjugate: position-decay requires mu " << (n >= 3 ? "< (1+n/(n-2))^-2 = " : "<= ") << bound
          << " for n = " << n << " (got mu = " << mu << ")";
      throw std::invalid_argument(err.str());
    }
  } else if (kind == ConjugateKind::MomentumDecay) {
    if (!(mu > 0.0 && mu < 2.0)) {
      err << "conjugate: momentum-decay requires 0 < mu < 2 (got mu = " << mu << ")";
      throw std::invalid_argument(err.str());
    }
  }
}

std::string ConjugateSpec::tag() const {
  std::ostringstream os;
  switch (kind) {
    case ConjugateKind::Dilation: os << "A_D"; break;
    case ConjugateKind::PositionDecay: os << "A_F mu=" << mu; break;
    case ConjugateKind::MomentumDecay: os << "A_u mu=" << mu; break;
  }
  if (!active_coords.empty()) {
    os << " K={";
    for (std::size_t i = 0; i < active_coords.size(); ++i) os << (i ? "," : "") << active_coords[i] + 1;
    os << "}";
  }
  if (allow_inadmissible) os << " [override]";
  return os.str();
}

void to_json(nlohmann::json& j, const ConjugateSpec& s) {
  std::vector<int> one_based;
  for (int c : s.active_coords) one_based.push_back(c + 1);
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"mu", s.mu}, {"active_coords", one_based}};
  if (s.allow_inadmissible) j["allow_inadmissible"] = true;
}

void from_json(const nlohmann::json& j, ConjugateSpec& s) {
  ConjugateSpec out;
  out.kind = conjugate_kind_from_string(j.value("kind", std::string("dilation")));
  out.mu = j.value("mu", 0.0);
  if (j.contains("active_coords"))
    for (int c : j.at("active_coords").get<std::vector<int>>()) {
      if (c < 1) throw std::invalid_argument("conjugate.active_coords are 1-based");
      out.active_coords.push_back(c - 1);
    }
  out.allow_inadmissible = j.value("allow_inadmissible", false);
  s = std::move(out);
}

FProfile f_derivatives(double mu, double x) {
  const double J2 = 1.0 + x * x;
  auto Jp = [J2](double e) { return std::pow(J2, 0.5 * e); };
  const double m = mu;
  FProfile p;
  p.F = x * Jp(-m);
  p.d1 = (1 - m) * Jp(-m) + m * Jp(-m - 2);
  p.d2 = -m * x * Jp(-m - 2) * (1 - m + (m + 2) / J2);
  p.d3 = m * (1 - m) * (1 + m) * Jp(-m - 2) + 2 * m * (m + 1) * (m + 2) * Jp(-m - 4) -
         m * (m + 2) * (m + 4) * Jp(-m - 6);
  p.d4 = x * (m * (m - 1) * (m + 1) * (m + 2) * Jp(-m - 4) - 2 * m * (m + 1) * (m + 2) * (m + 4) * Jp(-m - 6) +
              m * (m + 2) * (m + 4) * (m + 6) * Jp(-m - 8));
  return p;
}

double w_profile(double mu, const std::function<double(double)>& v1_prime, double x) {
  const FProfile p = f_derivatives(mu, x);
  return -p.F * v1_prime(x) - 0.5 * p.d3;
}

LinearMap japanese_position_subset(const GridSpec& grid, double s, const std::vector<int>& coords) {
  const bool radial = grid.is_radial();
  return position_multiplier(grid, "<q>^" + std::to_string(s), [s, coords, radial](std::span<const double> x) {
    return Complex(std::pow(1.0 + squared_subset(x, coords, radial), 0.5 * s), 0.0);
  });
}

PointFn momentum_decay_symbol(const GridSpec& grid, const ConjugateSpec& spec) {
  if (spec.momentum_symbol) return spec.momentum_symbol;
  const bool radial = grid.is_radial();
  const double mu = spec.mu;
  const auto coords = spec.active_coords;
  return [mu, coords, radial](std::span<const double> xi) {
    return Complex(std::pow(1.0 + squared_subset(xi, coords, radial), -0.5 * mu), 0.0);
  };
}

LinearMap build_conjugate(const GridSpec& grid, const ConjugateSpec& spec) {
  spec.validate(grid.n);
  if (grid.is_radial() && !spec.active_coords.empty() &&
      !(spec.active_coords.size() == 1 && spec.active_coords[0] == 0))
    throw std::invalid_argument("conjugate: partial-direction operators need a full-tensor grid");
  const std::vector<int> axes = grid.is_radial() ? std::vector<int>{0} : axes_of(grid, spec.active_coords);
  const std::vector<int>& subset = grid.is_radial() ? std::vector<int>{} : spec.active_coords;
  switch (spec.kind) {
    case ConjugateKind::Dilation: return dilation(grid, axes).with_tag(spec.tag());
    case ConjugateKind::PositionDecay: {
      if (spec.mu == 0.0) return dilation(grid, axes).with_tag(spec.tag());
      return sandwich(japanese_position_subset(grid, -0.5 * spec.mu, subset), dilation(grid, axes))
          .with_tag(spec.tag());
    }
    case ConjugateKind::MomentumDecay: {
      const PointFn lambda = momentum_decay_symbol(grid, spec);
      LinearMap sum = LinearMap::zero(grid);
      for (std::size_t i = 0; i < axes.size(); ++i) {
        const int a = axes[i];
        const LinearMap lam = momentum_multiplier(grid, "lambda(p)", lambda);
        const LinearMap pa = momentum(grid, a);
        // p_a and lambda(p) commute, so the product is Hermitian.
        const LinearMap plam = LinearMap::hermitian(grid, "p·lambda(p)", [pa, lam](const Vector& in, Vector& out) {
          Vector t;
          lam.apply(in, t);
          pa.apply(t, out);
        });
        const LinearMap term = symmetric_product(coordinate(grid, a), plam);
        sum = i == 0 ? term : sum + term;
      }
      return sum.with_tag(spec.tag());
    }
  }
  throw std::logic_error("unreachable conjugate kind");
}

}  // namespace lapkit
