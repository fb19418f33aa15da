#include "lapkit/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lapkit/conjugate.hpp"
#include "lapkit/fourier.hpp"
#include "lapkit/linear_map.hpp"
#include "lapkit/random.hpp"

namespace lapkit {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAgreement = 0.05;

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::MR: return "MR";
    case TheoremId::BoGo: return "BoGo";
    case TheoremId::AF2: return "AF2";
    case TheoremId::AF3: return "AF3";
    case TheoremId::AF1D: return "AF1D";
    case TheoremId::AU: return "AU";
    case TheoremId::PARTIAL: return "PARTIAL";
    case TheoremId::OSC: return "OSC";
  }
  return "MR";
}

TheoremId theorem_from_string(const std::string& s) {
  for (auto id : {TheoremId::MR, TheoremId::BoGo, TheoremId::AF2, TheoremId::AF3, TheoremId::AF1D, TheoremId::AU,
                  TheoremId::PARTIAL, TheoremId::OSC})
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown theorem id '" + s + "'");
}

bool HypothesisLine::operator==(const HypothesisLine& o) const {
  return id == o.id && statement == o.statement && group == o.group && verdict == o.verdict &&
         same_double(observed, o.observed) && same_double(bound, o.bound) && same_double(margin, o.margin) &&
         heuristic == o.heuristic && delegated == o.delegated && note == o.note;
}

const HypothesisLine* TheoremVerdict::line(const std::string& key) const {
  for (const auto& l : lines)
    if (l.id == key) return &l;
  return nullptr;
}

Verdict TheoremVerdict::group_verdict(const std::string& group) const {
  Verdict v = Verdict::Pass;
  for (const auto& l : lines)
    if (l.group == group) v = combine(v, l.verdict);
  return v;
}

bool TheoremVerdict::operator==(const TheoremVerdict& o) const {
  if (id != o.id || lines != o.lines || notes != o.notes || verdict != o.verdict) return false;
  if (constants.size() != o.constants.size()) return false;
  for (const auto& [k, v] : constants) {
    auto it = o.constants.find(k);
    if (it == o.constants.end() || !same_double(v, it->second)) return false;
  }
  return true;
}

void to_json(json& j, const TheoremVerdict& v) {
  json lines = json::array();
  for (const auto& l : v.lines)
    lines.push_back({{"id", l.id}, {"statement", l.statement}, {"group", l.group}, {"verdict", to_string(l.verdict)},
                     {"observed", encode_double(l.observed)}, {"bound", encode_double(l.bound)},
                     {"margin", encode_double(l.margin)}, {"heuristic", l.heuristic}, {"delegated", l.delegated},
                     {"note", l.note}});
  json constants = json::object();
  for (const auto& [k, c] : v.constants) constants[k] = encode_double(c);
  j = {{"theorem", to_string(v.id)}, {"verdict", to_string(v.verdict)}, {"lines", lines},
       {"constants", constants}, {"notes", v.notes}};
}

void from_json(const json& j, TheoremVerdict& v) {
  v = TheoremVerdict{};
  v.id = theorem_from_string(j.at("theorem").get<std::string>());
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  for (const auto& l : j.at("lines")) {
    HypothesisLine h;
    h.id = l.at("id").get<std::string>();
    h.statement = l.at("statement").get<std::string>();
    h.group = l.at("group").get<std::string>();
    h.verdict = verdict_from_string(l.at("verdict").get<std::string>());
    h.observed = decode_double(l.at("observed"));
    h.bound = decode_double(l.at("bound"));
    h.margin = decode_double(l.at("margin"));
    h.heuristic = l.at("heuristic").get<bool>();
    h.delegated = l.at("delegated").get<bool>();
    h.note = l.at("note").get<std::string>();
    v.lines.push_back(std::move(h));
  }
  for (const auto& [k, c] : j.at("constants").items()) v.constants[k] = decode_double(c);
  v.notes = j.at("notes").get<std::vector<std::string>>();
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<std::vector<double>> shell_points(int n, int shells, const SamplerSettings& s) {
  if (n < 1) throw std::invalid_argument("sampler needs n >= 1");
  if (shells < 4) throw std::invalid_argument("sampler needs at least 4 shells");
  if (!(s.r_min > 0.0) || !(s.r_max > s.r_min)) throw std::invalid_argument("sampler needs 0 < r_min < r_max");
  std::vector<double> radii;
  const int logs = shells / 2, lins = shells - logs;
  for (int i = 0; i < logs; ++i) radii.push_back(s.r_min * std::pow(s.r_max / s.r_min, double(i) / (logs - 1)));
  const double r_lin = std::min(s.r_max, 20.0);
  for (int i = 0; i < lins; ++i) radii.push_back(s.r_min + (r_lin - s.r_min) * double(i) / (lins - 1));

  Rng rng(s.seed);
  std::vector<std::vector<double>> pts;
  for (double r : radii) {
    if (n == 1) {
      pts.push_back({r});
      pts.push_back({-r});
      continue;
    }
    std::vector<double> axis(static_cast<std::size_t>(n), 0.0);
    axis[0] = r;
    pts.push_back(axis);
    for (int d = 0; d < s.directions; ++d) {
      std::vector<double> u(static_cast<std::size_t>(n));
      double norm = 0.0;
      for (auto& c : u) {
        c = rng.normal();
        norm += c * c;
      }
      norm = std::sqrt(norm);
      for (auto& c : u) c *= r / norm;
      pts.push_back(std::move(u));
    }
  }
  return pts;
}

namespace {

struct PassStats {
  double sup = -kInf, inf = kInf, sup_abs = 0.0, tail = 0.0, decade = 0.0;
  std::vector<double> at;
  std::optional<std::string> nonfinite;
};

std::string describe(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

PassStats run_pass(int n, int shells, const std::function<double(std::span<const double>)>& f,
                   const SamplerSettings& s) {
  const auto pts = shell_points(n, shells, s);
  std::vector<double> vals(pts.size());
  const int threads = std::max(1, std::min<int>(s.threads, static_cast<int>(pts.size())));
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) vals[i] = f(pts[i]);
  };
  if (threads == 1) {
    work(0, pts.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (pts.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(pts.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  PassStats p;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = vals[i];
    if (!std::isfinite(v)) {
      if (!p.nonfinite) p.nonfinite = describe(pts[i]);
      continue;
    }
    double r2 = 0.0;
    for (double c : pts[i]) r2 += c * c;
    const double r = std::sqrt(r2);
    p.sup = std::max(p.sup, v);
    p.inf = std::min(p.inf, v);
    if (std::abs(v) >= p.sup_abs) {
      p.sup_abs = std::abs(v);
      p.at = pts[i];
    }
    if (r >= s.r_max / 10.0) p.tail = std::max(p.tail, std::abs(v));
    else if (r >= s.r_max / 100.0) p.decade = std::max(p.decade, std::abs(v));
  }
  if (p.sup == -kInf) p.sup = p.inf = 0.0;
  return p;
}

}  // namespace

SampleStats sample_extremes(int n, const std::function<double(std::span<const double>)>& f,
                            const SamplerSettings& s) {
  if (s.shells < 40) throw std::invalid_argument("sampler needs at least 40 shells");
  const PassStats a = run_pass(n, s.shells, f, s);
  const PassStats b = run_pass(n, 2 * s.shells, f, s);
  SampleStats st;
  st.sup = std::max(a.sup, b.sup);
  st.inf = std::min(a.inf, b.inf);
  st.sup_abs = std::max(a.sup_abs, b.sup_abs);
  st.tail_sup = std::max(a.tail, b.tail);
  st.decade_sup = std::max(a.decade, b.decade);
  st.sup_location = b.sup_abs >= a.sup_abs ? b.at : a.at;
  st.nonfinite_at = a.nonfinite ? a.nonfinite : b.nonfinite;
  // Shifts of sup and inf measured against the overall scale, so a signed
  // function whose extremes sit near zero does not register as unconverged.
  const double scale = std::max(st.sup_abs, 1e-14);
  st.relative_change =
      std::max({std::abs(a.sup - b.sup), std::abs(a.inf - b.inf), std::abs(a.sup_abs - b.sup_abs)}) / scale;
  st.converged = st.relative_change <= kAgreement && !st.nonfinite_at;
  st.growing = st.tail_sup > 2.0 * st.decade_sup && st.tail_sup > 1e-12 * std::max(1.0, st.sup_abs);
  return st;
}

SupResult sup_weighted(int n, const std::function<double(std::span<const double>)>& g,
                       const std::function<double(std::span<const double>)>& weight, const SamplerSettings& s) {
  const auto st = sample_extremes(n, [&](std::span<const double> x) { return std::abs(g(x) * weight(x)); }, s);
  return {st.sup_abs, st.converged, st.relative_change, st.nonfinite_at};
}

// ---------------------------------------------------------------------------
// Pointwise quantities

namespace {

using Fn = std::function<double(std::span<const double>)>;

ScalarField zero_field() {
  return ScalarField::radial("0", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; });
}

double norm2(std::span<const double> x, int k) {
  double r2 = 0.0;
  for (int j = 0; j < k && j < static_cast<int>(x.size()); ++j) r2 += x[j] * x[j];
  return r2;
}

double value_of(const ScalarField& f, std::span<const double> x) { return f.value(x).real(); }

std::vector<double> grad_of(const ScalarField& f, std::span<const double> x) {
  std::vector<Complex> g(x.size());
  f.gradient(x, g);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = g[i].real();
  return out;
}

std::vector<double> hess_of(const ScalarField& f, std::span<const double> x) {
  std::vector<Complex> h(x.size() * x.size());
  f.hessian(x, h);
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i].real();
  return out;
}

// x_K . grad_K V over the first k coordinates.
double euler(const ScalarField& f, std::span<const double> x, int k) {
  const auto g = grad_of(f, x);
  double s = 0.0;
  for (int j = 0; j < k; ++j) s += x[j] * g[j];
  return s;
}

// (x_K . grad_K)^2 V = x_K.grad_K V + x_K^T H_KK x_K.
double euler2(const ScalarField& f, std::span<const double> x, int k) {
  const std::size_t n = x.size();
  const auto h = hess_of(f, x);
  double quad = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) quad += x[a] * h[a * n + b] * x[b];
  return euler(f, x, k) + quad;
}

double grad_norm(const ScalarField& f, std::span<const double> x, int k) {
  const auto g = grad_of(f, x);
  double s = 0.0;
  for (int j = 0; j < k; ++j) s += g[j] * g[j];
  return std::sqrt(s);
}

// (F.grad)^2 V for F(x) = x <x>^-mu.
double decay_euler2(const ScalarField& f, std::span<const double> x, double mu) {
  const int n = static_cast<int>(x.size());
  const double r2 = norm2(x, n), J2 = 1.0 + r2;
  const double g = std::pow(J2, -0.5 * mu);
  const auto h = hess_of(f, x);
  double quad = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) quad += x[a] * h[a * n + b] * x[b];
  return g * (g - mu * r2 * std::pow(J2, -0.5 * mu - 1.0)) * euler(f, x, n) + g * g * quad;
}

// |num| / den with 0/0 = 0 and c/0 = inf.
double ratio(double num, double den) {
  const double a = std::abs(num);
  if (den > 0.0) return a / den;
  return a <= 1e-13 ? 0.0 : kInf;
}

// ---------------------------------------------------------------------------
// Verdict assembly

struct Builder {
  TheoremVerdict v;
  int n;
  SamplerSettings sampler;

  HypothesisLine& add(HypothesisLine l) {
    v.lines.push_back(std::move(l));
    return v.lines.back();
  }

  HypothesisLine& arithmetic(std::string id, std::string statement, bool ok, double observed, double bound,
                             double margin, std::string group = "") {
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.group = std::move(group);
    l.verdict = ok ? Verdict::Pass : Verdict::Fail;
    l.observed = observed;
    l.bound = bound;
    l.margin = margin;
    return add(std::move(l));
  }

  HypothesisLine& missing(std::string id, std::string statement, const std::string& what) {
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.verdict = Verdict::Inconclusive;
    l.observed = std::numeric_limits<double>::quiet_NaN();
    l.bound = std::numeric_limits<double>::quiet_NaN();
    l.margin = std::numeric_limits<double>::quiet_NaN();
    l.note = "needs " + what + " in closed form";
    return add(std::move(l));
  }

  static void annotate(HypothesisLine& l, const SampleStats& st) {
    if (st.nonfinite_at) {
      l.verdict = Verdict::Fail;
      l.note = "non-finite sample at " + *st.nonfinite_at;
    } else if (!st.converged && l.verdict == Verdict::Pass) {
      l.verdict = Verdict::Inconclusive;
      l.note = "sample refinement changed the extremes by " + std::to_string(st.relative_change);
    }
  }

  // sup |f| finite: pass when the two passes agree and the last decade does
  // not grow.
  HypothesisLine& bounded(std::string id, std::string statement, const Fn& f, bool heuristic = false) {
    const auto st = sample_extremes(n, [&](std::span<const double> x) { return std::abs(f(x)); }, sampler);
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.heuristic = heuristic;
    l.observed = st.sup_abs;
    l.bound = kInf;
    l.margin = kAgreement - st.relative_change;
    l.verdict = Verdict::Pass;
    if (st.growing) {
      l.verdict = Verdict::Fail;
      l.note = "grows on the last sampled decade";
    }
    annotate(l, st);
    if (heuristic && l.note.empty()) l.note = "heuristic: sampled supremum";
    return add(std::move(l));
  }

  // sup f <= bound (strict when asked).
  HypothesisLine& upper(std::string id, std::string statement, const Fn& f, double bound, bool strict,
                        double floor = -kInf) {
    const auto st = sample_extremes(n, f, sampler);
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.observed = std::max(st.sup, floor);
    l.bound = bound;
    l.margin = bound - l.observed;
    l.verdict = (strict ? l.observed < bound : l.observed <= bound) ? Verdict::Pass : Verdict::Fail;
    annotate(l, st);
    return add(std::move(l));
  }

  // inf f >= bound (strict when asked).
  HypothesisLine& lower(std::string id, std::string statement, const Fn& f, double bound, bool strict,
                        double tol = 0.0) {
    const auto st = sample_extremes(n, f, sampler);
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.observed = st.inf;
    l.bound = bound;
    l.margin = st.inf - bound;
    l.verdict = (strict ? st.inf > bound - tol : st.inf >= bound - tol) ? Verdict::Pass : Verdict::Fail;
    annotate(l, st);
    return add(std::move(l));
  }

  HypothesisLine& delegated(std::string id, std::string statement, std::optional<double> value, double bound,
                            bool upper_bound, std::string source, std::string group = "") {
    HypothesisLine l;
    l.id = std::move(id);
    l.statement = std::move(statement);
    l.group = std::move(group);
    l.delegated = true;
    if (!value) {
      l.verdict = Verdict::Inconclusive;
      l.observed = l.bound = l.margin = std::numeric_limits<double>::quiet_NaN();
      l.note = "to be estimated by " + source;
      return add(std::move(l));
    }
    l.observed = *value;
    l.bound = bound;
    l.margin = upper_bound ? bound - *value : *value - bound;
    const bool ok = std::isfinite(*value) && (upper_bound ? *value < bound : *value >= bound);
    l.verdict = ok ? Verdict::Pass : Verdict::Fail;
    l.note = "delegated to " + source;
    return add(std::move(l));
  }

  TheoremVerdict finish() {
    // Ungrouped lines are all required; grouped lines are alternatives.
    Verdict base = Verdict::Pass;
    std::vector<std::string> groups;
    for (const auto& l : v.lines) {
      if (l.group.empty()) base = combine(base, l.verdict);
      else if (std::find(groups.begin(), groups.end(), l.group) == groups.end()) groups.push_back(l.group);
    }
    if (!groups.empty()) {
      Verdict best = Verdict::Fail;
      for (const auto& g : groups) {
        const Verdict gv = v.group_verdict(g);
        if (gv == Verdict::Pass) best = Verdict::Pass;
        else if (gv == Verdict::Inconclusive && best == Verdict::Fail) best = Verdict::Inconclusive;
      }
      base = combine(base, best);
    }
    v.verdict = base;
    return v;
  }
};

// ---------------------------------------------------------------------------
// Relative-boundedness heuristics

struct OperatorProbe {
  double relative = 0.0;                  // ||V (Δ + E)^-1||
  double head = 0.0;                      // ||V <p>^-2||
  std::vector<double> tails;              // ||1_{|q|>R} V <p>^-2|| for R = L/8, L/4, L/2
};

OperatorProbe probe_operator(const GridSpec& grid, const ScalarField& f) {
  const std::size_t size = grid.size();
  Vector values(static_cast<Eigen::Index>(size));
  std::vector<double> radius(size);
  std::vector<double> pt(static_cast<std::size_t>(grid.n));
  for (std::size_t i = 0; i < size; ++i) {
    evaluation_point(grid, i, pt);
    values[static_cast<Eigen::Index>(i)] = f.value(pt).real();
    radius[i] = node_radius(grid, i);
  }
  const auto fft = Fourier::for_grid(grid);
  auto symbol = [&](double shift) {
    Vector s(static_cast<Eigen::Index>(size));
    std::vector<double> xi(static_cast<std::size_t>(grid.axis_count()));
    for (std::size_t i = 0; i < size; ++i) {
      grid.frequency_point(i, xi);
      double k2 = 0.0;
      for (double k : xi) k2 += k * k;
      s[static_cast<Eigen::Index>(i)] = 1.0 / (k2 + shift);
    }
    return s;
  };
  auto norm_of = [&](const Vector& diag, const Vector& sym) {
    LinearMap m(grid, "probe",
                [fft, diag, sym](const Vector& in, Vector& out) {
                  fft->multiply(sym, in, out);
                  out = out.cwiseProduct(diag);
                },
                [fft, diag, sym](const Vector& in, Vector& out) {
                  const Vector tmp = in.cwiseProduct(diag.conjugate());
                  fft->multiply(sym.conjugate(), tmp, out);
                },
                false);
    return estimate_norm(m, 30, 0x5EED, 1e-6).value;
  };
  const double h = grid.spacing();
  const double shift = std::max(1.0, 0.25 * std::pow(std::numbers::pi / h, 2));
  OperatorProbe p;
  p.relative = norm_of(values, symbol(shift));
  const Vector japanese = symbol(1.0);
  p.head = norm_of(values, japanese);
  for (double frac : {0.125, 0.25, 0.5}) {
    Vector tail = values;
    for (std::size_t i = 0; i < size; ++i)
      if (radius[i] <= frac * grid.L) tail[static_cast<Eigen::Index>(i)] = 0.0;
    p.tails.push_back(norm_of(tail, japanese));
  }
  return p;
}

void delta_bounded(Builder& b, const std::string& id, const std::string& name, const ScalarField& f,
                   const TheoremParams& params) {
  const std::string statement = name + " is Δ-bounded with relative bound < 1";
  if (params.grid) {
    const auto p = probe_operator(*params.grid, f);
    auto& l = b.arithmetic(id, statement, std::isfinite(p.relative) && p.relative < 1.0, p.relative, 1.0,
                           1.0 - p.relative);
    l.heuristic = true;
    l.note = "heuristic: ||V(Δ+E)^-1|| on the grid at E = (pi/h)^2/4";
    return;
  }
  auto& l = b.bounded(id, statement, [&](std::span<const double> x) { return value_of(f, x); }, true);
  if (l.verdict == Verdict::Pass) l.note = "heuristic: bounded potentials have relative bound 0";
}

void delta_compact(Builder& b, const std::string& id, const std::string& name, const ScalarField& f,
                   const TheoremParams& params) {
  const std::string statement = name + " is Δ-compact";
  if (params.grid) {
    const auto p = probe_operator(*params.grid, f);
    const double first = p.tails.front(), last = p.tails.back();
    const bool vanishing = first <= 1e-12 * std::max(1.0, p.head);
    const double r = vanishing ? 0.0 : last / first;
    auto& l = b.arithmetic(id, statement, std::isfinite(p.head) && (vanishing || r <= 0.5), r, 0.5, 0.5 - r);
    l.heuristic = true;
    l.note = "heuristic: ||1_{|q|>R} V <p>^-2|| ratio between R = L/2 and R = L/8";
    return;
  }
  const auto st = sample_extremes(b.n, [&](std::span<const double> x) { return std::abs(value_of(f, x)); }, b.sampler);
  const double r = st.sup_abs > 0.0 ? st.tail_sup / st.sup_abs : 0.0;
  auto& l = b.arithmetic(id, statement, r <= 0.1, r, 0.1, 0.1 - r);
  l.heuristic = true;
  l.note = "heuristic: sampled tail supremum relative to the global supremum";
  Builder::annotate(l, st);
}

// Pointwise compactness proxy for a derived field: bounded, and small on
// the last sampled decade.
void pointwise_compact(Builder& b, const std::string& id, const std::string& statement, const Fn& f) {
  const auto st = sample_extremes(b.n, [&](std::span<const double> x) { return std::abs(f(x)); }, b.sampler);
  const double r = st.sup_abs > 0.0 ? st.tail_sup / st.sup_abs : 0.0;
  auto& l = b.arithmetic(id, statement, !st.growing && r <= 0.1, r, 0.1, 0.1 - r);
  l.heuristic = true;
  l.note = "heuristic: sampled tail supremum relative to the global supremum";
  Builder::annotate(l, st);
}

bool smooth(const ScalarField& f) { return f.has_gradient() && f.has_hessian(); }

struct Fields {
  ScalarField v1, v2;
  bool has_v2;
};

Fields fields_of(const PotentialSpec& v) { return {v.v1, v.v2 ? *v.v2 : zero_field(), v.v2.has_value()}; }

void v2_nonnegative(Builder& b, const Fields& f) {
  auto& l = b.lower("V2_nonneg", "V2 >= 0", [&](std::span<const double> x) { return value_of(f.v2, x); }, 0.0,
                    false, 1e-14);
  if (!f.has_v2) l.note = "V2 = 0";
}

int split_of(const TheoremParams& p) { return p.k_split > 0 ? p.k_split : p.n; }

// ---------------------------------------------------------------------------
// Per-theorem line sets

void dilation_first_order_bounds(Builder& b, const Fields& f, int k, const std::string& suffix) {
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_grad" + suffix + "_delta_bounded";
    const std::string st = "grad" + suffix + " " + name + " and q" + suffix + ".grad" + suffix + " " + name +
                           " are Δ-bounded";
    if (!field->has_gradient()) {
      b.missing(id, st, "the gradient of " + name);
      continue;
    }
    b.bounded(id, st,
              [field, k](std::span<const double> x) {
                return std::max(grad_norm(*field, x, k), std::abs(euler(*field, x, k)));
              },
              true);
  }
}

void c1_virial(Builder& b, const Fields& f, const TheoremParams& p) {
  const double c1 = p.c1;
  const int n = p.n;
  b.arithmetic("c1_range", "0 <= c1 < 2", c1 >= 0.0 && c1 < 2.0, c1, 2.0, 2.0 - c1);
  const double cap = (2.0 - c1) * (n - 2.0) * (n - 2.0) / 4.0;
  b.v.constants["C_cap"] = cap;
  const std::string st = "x.grad V1 + c1 V1 <= C/|x|^2 with C in [0, (2-c1)(n-2)^2/4)";
  if (!f.v1.has_gradient()) {
    b.missing("virial_C", st, "the gradient of V1");
  } else {
    auto& l = b.upper("virial_C", st,
                      [&](std::span<const double> x) {
                        return norm2(x, n) * (euler(f.v1, x, n) + c1 * value_of(f.v1, x));
                      },
                      cap, true, 0.0);
    b.v.constants["C_observed"] = l.observed;
  }
  const std::string st2 = "-c1 x.grad V2 >= 0";
  if (c1 == 0.0) {
    b.arithmetic("V2_sign", st2, true, 0.0, 0.0, 0.0).note = "vacuous for c1 = 0";
  } else if (!f.v2.has_gradient()) {
    b.missing("V2_sign", st2, "the gradient of V2");
  } else {
    b.lower("V2_sign", st2, [&](std::span<const double> x) { return -c1 * euler(f.v2, x, n); }, 0.0, false, 1e-14);
  }
}

TheoremVerdict check_mr(Builder& b, const Fields& f, const TheoremParams& p) {
  const int k = split_of(p);
  b.arithmetic("k_ge_2", "k >= 2", k >= 2, k, 2, k - 2);
  b.bounded("V_real", "V is real (V2 = 0)", [&](std::span<const double> x) { return value_of(f.v2, x); });
  if (b.v.lines.back().observed != 0.0) b.v.lines.back().verdict = Verdict::Fail;
  if (!f.v1.has_gradient()) {
    b.missing("x_grad_bounded", "x.grad_x V is bounded", "the gradient of V");
    b.missing("virial_sign", "-x.grad_x V >= 0", "the gradient of V");
  } else {
    b.bounded("x_grad_bounded", "x.grad_x V is bounded", [&](std::span<const double> x) { return euler(f.v1, x, k); });
    b.lower("virial_sign", "-x.grad_x V >= 0", [&](std::span<const double> x) { return -euler(f.v1, x, k); }, 0.0,
            false, 1e-14);
  }
  const std::string st = "|(x.grad_x)^2 V| <= -c x.grad_x V";
  if (!smooth(f.v1)) {
    b.missing("second_order", st, "the Hessian of V");
  } else {
    auto& l = b.bounded("second_order", st, [&](std::span<const double> x) {
      return ratio(euler2(f.v1, x, k), -euler(f.v1, x, k));
    });
    b.v.constants["c"] = l.observed;
  }
  b.v.notes.push_back("the conclusion space is not specified; the dilation-weight sweep is the nearest concrete check");
  return b.finish();
}

TheoremVerdict check_bogo(Builder& b, const Fields& f, const TheoremParams& p) {
  const int n = p.n;
  b.arithmetic("n_ge_3", "n >= 3", n >= 3, n, 3, n - 3);
  delta_bounded(b, "V1_delta_bounded", "V1", f.v1, p);
  delta_bounded(b, "V2_delta_bounded", "V2", f.v2, p);
  v2_nonnegative(b, f);
  dilation_first_order_bounds(b, f, n, "");
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_q2_second", st = "|q|^2 (q.grad)^2 " + name + " is bounded";
    if (!smooth(*field)) {
      b.missing(id, st, "the Hessian of " + name);
      continue;
    }
    b.bounded(id, st, [field, n](std::span<const double> x) { return norm2(x, n) * euler2(*field, x, n); });
  }
  c1_virial(b, f, p);
  return b.finish();
}

TheoremVerdict check_af2(Builder& b, const Fields& f, const TheoremParams& p) {
  const int n = p.n;
  b.arithmetic("n_ge_3", "n >= 3", n >= 3, n, 3, n - 3);
  delta_bounded(b, "V1_delta_bounded", "V1", f.v1, p);
  delta_bounded(b, "V2_delta_bounded", "V2", f.v2, p);
  v2_nonnegative(b, f);
  dilation_first_order_bounds(b, f, n, "");
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_x_grad_decay", st = "|x| |grad " + name + "| <= C/|x|^2";
    if (!field->has_gradient()) {
      b.missing(id, st, "the gradient of " + name);
      continue;
    }
    b.bounded(id, st, [field, n](std::span<const double> x) {
      const double r2 = norm2(x, n);
      return r2 * std::sqrt(r2) * grad_norm(*field, x, n);
    });
  }
  c1_virial(b, f, p);
  if (n > 2) b.v.constants["hardy_constant"] = 2.0 / (n - 2.0);
  b.v.notes.push_back("the Hardy-derived constant is taken as 2/(n-2)");
  return b.finish();
}

TheoremVerdict check_af3(Builder& b, const Fields& f, const TheoremParams& p) {
  const int n = p.n;
  const double mu = p.mu;
  b.arithmetic("n_ge_3", "n >= 3", n >= 3, n, 3, n - 3);
  const double mu_max = n >= 3 ? ConjugateSpec::position_decay_bound(n) : 0.0;
  b.v.constants["mu_max"] = mu_max;
  b.arithmetic("mu_admissible", "0 <= mu < (1 + n/(n-2))^-2", mu >= 0.0 && mu < mu_max, mu, mu_max, mu_max - mu);
  delta_compact(b, "V1_delta_compact", "V1", f.v1, p);
  delta_compact(b, "V2_delta_compact", "V2", f.v2, p);
  v2_nonnegative(b, f);
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_F_grad_compact", st = "q<q>^-mu . grad " + name + " is Δ-compact";
    if (!field->has_gradient()) {
      b.missing(id, st, "the gradient of " + name);
      continue;
    }
    pointwise_compact(b, id, st, [field, n, mu](std::span<const double> x) {
      return std::pow(1.0 + norm2(x, n), -0.5 * mu) * euler(*field, x, n);
    });
  }
  const double factor = 1.0 + n / (n - 2.0);
  const double lower_bound = n >= 3 ? -(n - 2.0) * (n - 2.0) * (1.0 - mu * factor * factor) / 2.0 : 0.0;
  b.v.constants["C_lower"] = lower_bound;
  const std::string st = "-x.grad V1 >= C/|x|^2 with C > -(n-2)^2 (1 - mu (1 + n/(n-2))^2)/2";
  if (!f.v1.has_gradient()) {
    b.missing("virial_lower", st, "the gradient of V1");
  } else {
    auto& l = b.lower("virial_lower", st,
                      [&](std::span<const double> x) { return -norm2(x, n) * euler(f.v1, x, n); }, lower_bound, true);
    b.v.constants["C_observed"] = l.observed;
  }
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_F_second", st = "|(x<x>^-mu . grad)^2 " + name + "| <= C' |x|^-2 <x>^-mu";
    if (!smooth(*field)) {
      b.missing(id, st, "the Hessian of " + name);
      continue;
    }
    b.bounded(id, st, [field, n, mu](std::span<const double> x) {
      const double r2 = norm2(x, n);
      return r2 * std::pow(1.0 + r2, 0.5 * mu) * decay_euler2(*field, x, mu);
    });
  }
  return b.finish();
}

TheoremVerdict check_af1d(Builder& b, const Fields& f, const TheoremParams& p) {
  const double mu = p.mu;
  b.arithmetic("n_eq_1", "n = 1", p.n == 1, p.n, 1, 1 - p.n);
  b.arithmetic("mu_range", "0 <= mu <= 1", mu >= 0.0 && mu <= 1.0, mu, 1.0, 1.0 - mu);
  delta_compact(b, "V1_delta_compact", "V1", f.v1, p);
  delta_compact(b, "V2_delta_compact", "V2", f.v2, p);
  v2_nonnegative(b, f);
  // Derivatives along the line.
  auto d1 = [](const ScalarField& s, double x) {
    const double pt[1] = {x};
    return grad_of(s, pt)[0];
  };
  auto d2 = [](const ScalarField& s, double x) {
    const double pt[1] = {x};
    return hess_of(s, pt)[0];
  };
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_F_deriv_compact", st = "F(q) " + name + "' is Δ-compact";
    if (!field->has_gradient()) {
      b.missing(id, st, "the derivative of " + name);
      continue;
    }
    pointwise_compact(b, id, st, [field, mu, d1](std::span<const double> x) {
      return f_derivatives(mu, x[0]).F * d1(*field, x[0]);
    });
  }
  const std::string w_st = "W = -F V1' - F'''/2 >= 0";
  if (!f.v1.has_gradient()) {
    b.missing("W_nonneg", w_st, "the derivative of V1");
  } else {
    b.lower("W_nonneg", w_st,
            [&](std::span<const double> x) { return w_profile(mu, [&](double t) { return d1(f.v1, t); }, x[0]); }, 0.0,
            false, 1e-14);
  }
  const std::string st1 = "|2F W' + F''' F' + F''^2| <= C1 W";
  const std::string st2 = "|F^2 V2'' + F F' V2'| <= C2 W";
  if (!smooth(f.v1)) {
    b.missing("W_C1", st1, "the second derivative of V1");
    b.missing("W_C2", st2, "the second derivative of V1");
  } else {
    auto W = [&](double x) {
      const auto fp = f_derivatives(mu, x);
      return -fp.F * d1(f.v1, x) - 0.5 * fp.d3;
    };
    auto& l1 = b.bounded("W_C1", st1, [&](std::span<const double> x) {
      const auto fp = f_derivatives(mu, x[0]);
      const double Wp = -fp.d1 * d1(f.v1, x[0]) - fp.F * d2(f.v1, x[0]) - 0.5 * fp.d4;
      return ratio(2.0 * fp.F * Wp + fp.d3 * fp.d1 + fp.d2 * fp.d2, W(x[0]));
    });
    b.v.constants["C1"] = l1.observed;
    if (!smooth(f.v2)) {
      b.missing("W_C2", st2, "the second derivative of V2");
    } else {
      auto& l2 = b.bounded("W_C2", st2, [&](std::span<const double> x) {
        const auto fp = f_derivatives(mu, x[0]);
        return ratio(fp.F * fp.F * d2(f.v2, x[0]) + fp.F * fp.d1 * d1(f.v2, x[0]), W(x[0]));
      });
      b.v.constants["C2"] = l2.observed;
    }
  }
  return b.finish();
}

void decay_bounds(Builder& b, const Fields& f, int k, const std::string& suffix, const std::string& group) {
  auto v1 = [&f](std::span<const double> x) { return value_of(f.v1, x); };
  auto v2 = [&f](std::span<const double> x) { return value_of(f.v2, x); };
  b.bounded("V1_japanese3" + suffix, "<q" + suffix + ">^3 V1 is bounded",
            [&](std::span<const double> x) { return std::pow(1.0 + norm2(x, k), 1.5) * v1(x); })
      .group = group;
  b.bounded("V2_japanese3" + suffix, "<q" + suffix + ">^3 V2 is bounded",
            [&](std::span<const double> x) { return std::pow(1.0 + norm2(x, k), 1.5) * v2(x); })
      .group = group;
  b.bounded("V1_q2_bounded" + suffix, "|q" + suffix + "|^2 V1 is bounded",
            [&](std::span<const double> x) { return norm2(x, k) * v1(x); })
      .group = group;
  b.bounded("V1_q_bounded" + suffix, "|q" + suffix + "| V1 is bounded",
            [&](std::span<const double> x) { return std::sqrt(norm2(x, k)) * v1(x); })
      .group = group;
}

double japanese_bound(Builder& b, const Fields& f, int k) {
  const auto st = sample_extremes(
      b.n, [&](std::span<const double> x) { return std::pow(1.0 + norm2(x, k), 1.5) * std::abs(value_of(f.v1, x)); },
      b.sampler);
  return st.sup_abs;
}

TheoremVerdict check_au(Builder& b, const Fields& f, const TheoremParams& p) {
  const int n = p.n;
  b.arithmetic("n_ge_3", "n >= 3", n >= 3, n, 3, n - 3);
  b.arithmetic("mu_range", "1 <= mu < 2", p.mu >= 1.0 && p.mu < 2.0, p.mu, 2.0, 2.0 - p.mu);
  delta_bounded(b, "V1_delta_bounded", "V1", f.v1, p);
  delta_bounded(b, "V2_delta_bounded", "V2", f.v2, p);
  v2_nonnegative(b, f);
  decay_bounds(b, f, n, "", "");
  b.v.constants["japanese3_sup"] = japanese_bound(b, f, n);
  b.delegated("coupling_small", "|q|^2 V1 and |q| V1 bounded with bound small enough", p.coupling_star, 1.0,
              false, "the mourre gap scan (largest coupling multiplier)");
  b.delegated("second_order_C", "|(f,[[V,iA_u],iA_u]f)| <= C ||p lambda^{1/2}(p) f||^2", p.second_order_constant,
              kInf, true, "the mourre second-order estimate");
  b.delegated("virial_C_prime", "(f,[V1,iA_u]f) >= -C' ||p lambda^{1/2}(p) f||^2 with C' < 2", p.virial_constant,
              2.0, true, "the mourre virial estimate");
  return b.finish();
}

TheoremVerdict check_partial(Builder& b, const Fields& f, const TheoremParams& p) {
  const int k = split_of(p);
  b.arithmetic("k_ge_3", "k >= 3", k >= 3, k, 3, k - 3);
  b.arithmetic("k_le_n", "k <= n", k <= p.n, k, p.n, p.n - k);
  delta_bounded(b, "V1_delta_bounded", "V1", f.v1, p);
  delta_bounded(b, "V2_delta_bounded", "V2", f.v2, p);
  v2_nonnegative(b, f);
  // Dilation alternative.
  const std::size_t dil_begin = b.v.lines.size();
  dilation_first_order_bounds(b, f, k, "_x");
  for (auto [name, field] : {std::pair{std::string("V1"), &f.v1}, std::pair{std::string("V2"), &f.v2}}) {
    const std::string id = name + "_x_second", st = "|(x.grad_x)^2 " + name + "| <= C/|x|^2";
    if (!smooth(*field)) {
      b.missing(id, st, "the Hessian of " + name);
      continue;
    }
    b.bounded(id, st, [field, k](std::span<const double> x) { return norm2(x, k) * euler2(*field, x, k); });
  }
  const double cap = (k - 2.0) * (k - 2.0) / 2.0;
  b.v.constants["C_prime_cap"] = cap;
  const std::string st = "x.grad_x V1 <= C'/|x|^2 with C' in [0, (k-2)^2/2)";
  if (!f.v1.has_gradient()) {
    b.missing("virial_partial", st, "the gradient of V1");
  } else {
    b.upper("virial_partial", st,
            [&](std::span<const double> x) { return norm2(x, k) * euler(f.v1, x, k); }, cap, true, 0.0);
  }
  for (std::size_t i = dil_begin; i < b.v.lines.size(); ++i) b.v.lines[i].group = "dilation";
  // Momentum-decay alternative.
  decay_bounds(b, f, k, "_x", "momentum-decay");
  b.delegated("coupling_small_x", "|q_x|^2 V1 and |q_x| V1 bounded with bound small enough", p.coupling_star, 1.0,
              false, "the mourre gap scan (largest coupling multiplier)", "momentum-decay");
  return b.finish();
}

}  // namespace

TheoremVerdict classify_oscillating(const OscillatingPotential& p, int n,
                                    const std::map<std::string, double>& coupling_star) {
  Builder b{TheoremVerdict{}, std::max(n, 1), SamplerSettings{}};
  b.v.id = TheoremId::OSC;
  const double a = p.alpha, be = p.beta;
  b.v.constants["alpha"] = a;
  b.v.constants["beta"] = be;
  b.v.constants["w"] = p.w;
  b.v.constants["k"] = p.k;
  b.arithmetic("n_ge_3", "n >= 3", n >= 3, n, 3, n - 3);
  b.arithmetic("alpha_pos", "alpha > 0", a > 0.0, a, 0.0, a);
  b.arithmetic("beta_pos", "beta > 0", be > 0.0, be, 0.0, be);
  auto star = [&](const std::string& g) -> std::optional<double> {
    auto it = coupling_star.find(g);
    if (it == coupling_star.end()) return std::nullopt;
    return it->second;
  };
  b.arithmetic("BoGo_beta", "beta >= 2", be >= 2.0, be, 2.0, be - 2.0, "BoGo");
  b.arithmetic("BoGo_gap", "beta - 2 alpha >= 2", be - 2.0 * a >= 2.0, be - 2.0 * a, 2.0, be - 2.0 * a - 2.0, "BoGo");
  b.delegated("BoGo_w", "w small enough", star("BoGo"), 1.0, false, "the hypothesis constants", "BoGo");
  b.arithmetic("AF2_beta", "beta >= 2", be >= 2.0, be, 2.0, be - 2.0, "AF2");
  b.arithmetic("AF2_gap", "beta - alpha >= 2", be - a >= 2.0, be - a, 2.0, be - a - 2.0, "AF2");
  b.delegated("AF2_w", "w small enough", star("AF2"), 1.0, false, "the hypothesis constants", "AF2");
  b.arithmetic("AU_beta", "beta >= 3", be >= 3.0, be, 3.0, be - 3.0, "AU");
  b.delegated("AU_w", "w small enough", star("AU"), 1.0, false, "the mourre gap scan", "AU");
  for (const auto& [g, t] : coupling_star) b.v.constants["w_star_" + g] = t * std::abs(p.w);
  return b.finish();
}

TheoremVerdict check_theorem(TheoremId id, const PotentialSpec& v, const TheoremParams& params,
                             const SamplerSettings& sampler) {
  if (params.n < 1) throw std::invalid_argument("check_theorem needs n >= 1");
  if (id == TheoremId::OSC) {
    if (!v.oscillating) throw std::invalid_argument("OSC applies to the oscillating potential only");
    std::map<std::string, double> stars;
    if (params.coupling_star) stars["AU"] = *params.coupling_star;
    auto verdict = classify_oscillating(*v.oscillating, params.n, stars);
    return verdict;
  }
  Builder b{TheoremVerdict{}, params.n, sampler};
  b.v.id = id;
  b.v.constants["n"] = params.n;
  b.v.constants["mu"] = params.mu;
  b.v.constants["c1"] = params.c1;
  b.v.constants["k"] = split_of(params);
  const Fields f = fields_of(v);
  switch (id) {
    case TheoremId::MR: return check_mr(b, f, params);
    case TheoremId::BoGo: return check_bogo(b, f, params);
    case TheoremId::AF2: return check_af2(b, f, params);
    case TheoremId::AF3: return check_af3(b, f, params);
    case TheoremId::AF1D: return check_af1d(b, f, params);
    case TheoremId::AU: return check_au(b, f, params);
    case TheoremId::PARTIAL: return check_partial(b, f, params);
    case TheoremId::OSC: break;
  }
  throw std::logic_error("unhandled theorem id");
}

}  // namespace lapkit
