#include "lapkit/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace lapkit {

using nlohmann::json;

double smoothstep7(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double t4 = t * t * t * t;
  return t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

double smoothstep7_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 140.0 * u * u * u;
}

double smoothstep7_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 420.0 * u * u * (1.0 - 2.0 * t);
}

double cutoff(double r) { return 1.0 - smoothstep7(r - 1.0); }
double cutoff_d1(double r) { return -smoothstep7_d1(r - 1.0); }
double cutoff_d2(double r) { return -smoothstep7_d2(r - 1.0); }

double OscillatingPotential::value(double r) const {
  if (r <= 1.0) return 0.0;
  return w * (1.0 - cutoff(r)) * std::sin(k * std::pow(r, alpha)) * std::pow(r, -beta);
}

double OscillatingPotential::d1(double r) const {
  if (r <= 1.0) return 0.0;
  const double a = 1.0 - cutoff(r), da = -cutoff_d1(r);
  const double ra = std::pow(r, alpha);
  const double s = std::sin(k * ra), ds = k * alpha * (ra / r) * std::cos(k * ra);
  const double e = std::pow(r, -beta), de = -beta * e / r;
  return w * (da * s * e + a * ds * e + a * s * de);
}

double OscillatingPotential::d2(double r) const {
  if (r <= 1.0) return 0.0;
  const double a = 1.0 - cutoff(r), da = -cutoff_d1(r), d2a = -cutoff_d2(r);
  const double ra = std::pow(r, alpha);
  const double phase_d = k * alpha * ra / r;
  const double s = std::sin(k * ra), c = std::cos(k * ra);
  const double ds = phase_d * c;
  const double d2s = k * alpha * (alpha - 1.0) * (ra / (r * r)) * c - phase_d * phase_d * s;
  const double e = std::pow(r, -beta), de = -beta * e / r, d2e = beta * (beta + 1.0) * e / (r * r);
  return w * (d2a * s * e + a * d2s * e + a * s * d2e + 2.0 * (da * ds * e + da * s * de + a * ds * de));
}

OscillatingSample eval_oscillating(const OscillatingPotential& p, std::span<const double> x) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  const double r = std::sqrt(r2);
  if (r <= 1.0) return {};
  const double kap = cutoff(r), dkap = cutoff_d1(r);
  const double ra = std::pow(r, p.alpha);
  const double value = p.value(r);
  // x.grad W = -w kappa' sin / r^(beta-1) - beta W + k w alpha (1-kappa) cos / r^(beta-alpha).
  const double first = -p.w * dkap * std::sin(p.k * ra) * std::pow(r, 1.0 - p.beta) - p.beta * value +
                       p.k * p.w * p.alpha * (1.0 - kap) * std::cos(p.k * ra) * std::pow(r, p.alpha - p.beta);
  return {value, first};
}

namespace {

struct Profile {
  std::function<double(double)> v, dv, d2v;
  double decay = std::numeric_limits<double>::quiet_NaN();
  std::string tag;
};

double get(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Profile profile_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  Profile p;
  if (kind == "zero") {
    p.v = [](double) { return 0.0; };
    p.dv = p.v;
    p.d2v = p.v;
    p.decay = std::numeric_limits<double>::infinity();
    p.tag = "0";
  } else if (kind == "oscillating") {
    OscillatingPotential o{get(j, "w", 0.01), get(j, "k", 1.0), get(j, "alpha", 2.0), get(j, "beta", 3.0)};
    if (!(o.alpha > 0.0)) throw std::invalid_argument("oscillating potential needs alpha > 0");
    p.v = [o](double r) { return o.value(r); };
    p.dv = [o](double r) { return o.d1(r); };
    p.d2v = [o](double r) { return o.d2(r); };
    p.decay = o.beta;
    p.tag = "osc(w=" + std::to_string(o.w) + ",k=" + std::to_string(o.k) + ",alpha=" + std::to_string(o.alpha) +
            ",beta=" + std::to_string(o.beta) + ")";
  } else if (kind == "power") {
    const double a = get(j, "amplitude", 1.0), s = get(j, "decay", 4.0);
    p.v = [a, s](double r) { return a * std::pow(1.0 + r * r, -0.5 * s); };
    p.dv = [a, s](double r) { return -a * s * r * std::pow(1.0 + r * r, -0.5 * s - 1.0); };
    p.d2v = [a, s](double r) {
      const double J2 = 1.0 + r * r;
      return -a * s * std::pow(J2, -0.5 * s - 1.0) + a * s * (s + 2.0) * r * r * std::pow(J2, -0.5 * s - 2.0);
    };
    p.decay = s;
    p.tag = std::to_string(a) + "<x>^-" + std::to_string(s);
  } else if (kind == "gaussian") {
    const double a = get(j, "amplitude", 1.0), sg = get(j, "width", 1.0);
    if (!(sg > 0.0)) throw std::invalid_argument("gaussian potential needs width > 0");
    const double c = 1.0 / (sg * sg);
    p.v = [a, c](double r) { return a * std::exp(-c * r * r); };
    p.dv = [a, c](double r) { return -2.0 * c * r * a * std::exp(-c * r * r); };
    p.d2v = [a, c](double r) { return (-2.0 * c + 4.0 * c * c * r * r) * a * std::exp(-c * r * r); };
    p.decay = std::numeric_limits<double>::infinity();
    p.tag = std::to_string(a) + "exp(-|x|^2/" + std::to_string(sg * sg) + ")";
  } else if (kind == "well") {
    const double depth = get(j, "depth", 5.0), R = get(j, "radius", 1.0);
    // Discontinuous: no closed-form derivatives.
    p.v = [depth, R](double r) { return r <= R ? -depth : 0.0; };
    p.decay = std::numeric_limits<double>::infinity();
    p.tag = "-" + std::to_string(depth) + "1{|x|<=" + std::to_string(R) + "}";
  } else {
    throw std::invalid_argument("unknown potential kind '" + kind + "'");
  }
  return p;
}

ScalarField radial_field(const Profile& p) {
  auto wrap = [](const std::function<double(double)>& f) -> std::function<Complex(double)> {
    if (!f) return {};
    return [f](double r) { return Complex(f(r), 0.0); };
  };
  return ScalarField::radial(p.tag, wrap(p.v), wrap(p.dv), wrap(p.d2v));
}

struct Factor {
  std::vector<int> coords;  // 0-based
  Profile profile;
};

double subset_radius(const std::vector<int>& coords, std::span<const double> x) {
  double r2 = 0.0;
  for (int c : coords)
    if (static_cast<std::size_t>(c) < x.size()) r2 += x[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
  return std::sqrt(r2);
}

// Product of radial profiles over disjoint coordinate subsets.
ScalarField product_field(std::vector<Factor> factors) {
  ScalarField f;
  std::string tag;
  bool smooth = true;
  for (const auto& fa : factors) {
    tag += (tag.empty() ? "" : " x ") + fa.profile.tag;
    smooth = smooth && fa.profile.dv && fa.profile.d2v;
  }
  f.tag = tag;
  auto shared = std::make_shared<const std::vector<Factor>>(std::move(factors));
  f.value = [shared](std::span<const double> x) {
    double v = 1.0;
    for (const auto& fa : *shared) v *= fa.profile.v(subset_radius(fa.coords, x));
    return Complex(v, 0.0);
  };
  if (!smooth) return f;
  f.gradient = [shared](std::span<const double> x, std::span<Complex> g) {
    std::fill(g.begin(), g.end(), Complex(0.0));
    const auto& fs = *shared;
    for (std::size_t a = 0; a < fs.size(); ++a) {
      double others = 1.0;
      for (std::size_t b = 0; b < fs.size(); ++b)
        if (b != a) others *= fs[b].profile.v(subset_radius(fs[b].coords, x));
      const double r = subset_radius(fs[a].coords, x);
      if (r <= 0.0) continue;
      const double d = fs[a].profile.dv(r) * others;
      for (int c : fs[a].coords) {
        const auto C = static_cast<std::size_t>(c);
        if (C < x.size()) g[C] = d * x[C] / r;
      }
    }
  };
  f.hessian = [shared](std::span<const double> x, std::span<Complex> h) {
    const std::size_t n = x.size();
    std::fill(h.begin(), h.end(), Complex(0.0));
    const auto& fs = *shared;
    const std::size_t m = fs.size();
    std::vector<double> r(m), v(m), dv(m), d2v(m);
    for (std::size_t a = 0; a < m; ++a) {
      r[a] = subset_radius(fs[a].coords, x);
      v[a] = fs[a].profile.v(r[a]);
      dv[a] = fs[a].profile.dv(r[a]);
      d2v[a] = fs[a].profile.d2v(r[a]);
    }
    auto others = [&](std::size_t a, std::size_t b) {
      double p = 1.0;
      for (std::size_t c = 0; c < m; ++c)
        if (c != a && c != b) p *= v[c];
      return p;
    };
    // Unit direction of factor a restricted to its coordinates.
    auto unit = [&](std::size_t a, std::size_t j) { return r[a] > 0.0 ? x[j] / r[a] : 0.0; };
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (int cj : fs[a].coords)
          for (int ck : fs[b].coords) {
            const auto j = static_cast<std::size_t>(cj), k = static_cast<std::size_t>(ck);
            if (j >= n || k >= n) continue;
            double val;
            if (a == b) {
              const double ujk = unit(a, j) * unit(a, k);
              const double tangential = r[a] > 1e-12 ? dv[a] / r[a] : d2v[a];
              val = (d2v[a] * ujk + tangential * ((j == k ? 1.0 : 0.0) - ujk)) * others(a, a);
            } else {
              val = dv[a] * unit(a, j) * dv[b] * unit(b, k) * others(a, b);
            }
            h[j * n + k] += val;
          }
  };
  return f;
}

ScalarField field_from_json(const json& j, double& decay, std::optional<OscillatingPotential>& osc) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "product") {
    std::vector<Factor> factors;
    decay = std::numeric_limits<double>::infinity();
    std::vector<bool> used;
    for (const auto& fj : j.at("factors")) {
      Factor fa;
      for (int c : fj.at("coords").get<std::vector<int>>()) {
        if (c < 1) throw std::invalid_argument("product potential coords are 1-based");
        if (static_cast<std::size_t>(c) > used.size()) used.resize(static_cast<std::size_t>(c), false);
        if (used[static_cast<std::size_t>(c - 1)])
          throw std::invalid_argument("product potential factors must use disjoint coords");
        used[static_cast<std::size_t>(c - 1)] = true;
        fa.coords.push_back(c - 1);
      }
      fa.profile = profile_from_json(fj);
      decay = std::min(decay, fa.profile.decay);
      factors.push_back(std::move(fa));
    }
    if (factors.empty()) throw std::invalid_argument("product potential needs at least one factor");
    return product_field(std::move(factors));
  }
  const Profile p = profile_from_json(j);
  decay = p.decay;
  if (kind == "oscillating")
    osc = OscillatingPotential{get(j, "w", 0.01), get(j, "k", 1.0), get(j, "alpha", 2.0), get(j, "beta", 3.0)};
  return radial_field(p);
}

}  // namespace

PotentialSpec potential_from_json(const json& j) {
  PotentialSpec p;
  p.kind = j.at("kind").get<std::string>();
  p.params = j;
  p.v1 = field_from_json(j, p.claimed_decay, p.oscillating);
  if (j.contains("imaginary") && !j.at("imaginary").is_null()) {
    double unused = 0.0;
    std::optional<OscillatingPotential> none;
    p.v2 = field_from_json(j.at("imaginary"), unused, none);
    p.v2->tag = "i(" + p.v2->tag + ")";
  }
  return p;
}

json potential_to_json(const PotentialSpec& p) { return p.params; }

PotentialSpec zero_potential() { return potential_from_json(json{{"kind", "zero"}}); }

PotentialSpec oscillating_potential(const OscillatingPotential& o) {
  return potential_from_json(json{{"kind", "oscillating"}, {"w", o.w}, {"k", o.k}, {"alpha", o.alpha}, {"beta", o.beta}});
}

LinearMap Hamiltonian::full() const {
  if (!has_imaginary) return re;
  return (re + scale(Complex(0.0, 1.0), im)).with_tag(re.tag() + " + i" + im.tag());
}

Hamiltonian build_hamiltonian(const GridSpec& grid, const PotentialSpec& potential) {
  const ScalarField v1 = potential.v1;
  const auto real_part = [v1](std::span<const double> x) { return Complex(v1.value(x).real(), 0.0); };
  LinearMap re = laplacian(grid);
  if (potential.kind != "zero")
    re = (re + position_multiplier(grid, "V1", real_part)).with_tag("Δ+" + v1.tag);
  Hamiltonian h{re, LinearMap::zero(grid), false};
  if (potential.v2) {
    const ScalarField v2 = *potential.v2;
    h.im = position_multiplier(grid, "V2", [v2](std::span<const double> x) {
      return Complex(v2.value(x).real(), 0.0);
    });
    h.has_imaginary = true;
  }
  return h;
}

}  // namespace lapkit
