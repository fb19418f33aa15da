#include "lapkit/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lapkit/commutators.hpp"
#include "lapkit/operators.hpp"
#include "lapkit/states.hpp"

namespace lapkit {

using nlohmann::json;

namespace {

// Rejects keys outside the allowed set so that typos surface as errors.
void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw std::invalid_argument(path + ": unknown field '" + k + "'");
}

template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config", 0) == 0) throw;
    throw std::invalid_argument(path + ": " + msg);
  }
}

}  // namespace

void RunConfig::validate() const {
  at_path("config.grid", [&] {
    grid.validate();
    return 0;
  });
  at_path("config.conjugate", [&] {
    conjugate.validate(grid.n);
    return 0;
  });
  at_path("config.potential", [&] {
    potential_from_json(potential);
    return 0;
  });
  if (threads < 1) throw std::invalid_argument("config.threads: must be >= 1");
  if (k_split < 0 || k_split > grid.n) throw std::invalid_argument("config.k_split: must lie in [0, n]");
  if (commutators.probes < 1) throw std::invalid_argument("config.commutators.probes: must be >= 1");
  for (int o : commutators.orders)
    if (o != 1 && o != 2) throw std::invalid_argument("config.commutators.orders: orders are 1 or 2");
  if (mourre.probes < 1) throw std::invalid_argument("config.mourre.probes: must be >= 1");
  if (mourre.c1 != 0.0 && conjugate.kind != ConjugateKind::Dilation)
    throw std::invalid_argument("config.mourre.c1: c1 > 0 needs the dilation conjugate");
  if (eigs.count < 1 || eigs.count > 20) throw std::invalid_argument("config.eigs.count: must lie in [1, 20]");
  at_path("config.sweep", [&] {
    sweep.plan.validate();
    return 0;
  });
  const WeightKind w = sweep.plan.weights.kind;
  const auto need = [&](ConjugateKind k, const char* what) {
    if (conjugate.kind != k)
      throw std::invalid_argument(std::string("config.sweep.weights: ") + what + " weights need the " +
                                  to_string(k) + " conjugate");
    if (sweep.plan.weights.mu != conjugate.mu)
      throw std::invalid_argument("config.sweep.weights.mu: must equal config.conjugate.mu");
  };
  if (w == WeightKind::MomentumDecay) need(ConjugateKind::MomentumDecay, "momentum-decay");
  if (w == WeightKind::PositionDecay) need(ConjugateKind::PositionDecay, "position-decay");
  if ((w == WeightKind::SInverseSqrt || w == WeightKind::SConjugate) && conjugate.kind == ConjugateKind::PositionDecay)
    throw std::invalid_argument("config.sweep.weights: S-weights need the dilation or momentum-decay conjugate");
  if (w == WeightKind::Partial && grid.is_radial())
    throw std::invalid_argument("config.sweep.weights: partial weights need a full tensor grid");
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"name", "grid", "potential", "conjugate", "theorems", "k_split", "commutators", "mourre", "eigs", "sweep",
              "seed", "threads"});
  RunConfig c;
  c.name = at_path("config.name", [&] { return j.value("name", c.name); });
  if (!j.contains("grid")) throw std::invalid_argument("config.grid: missing");
  c.grid = at_path("config.grid", [&] { return j.at("grid").get<GridSpec>(); });
  if (j.contains("potential")) c.potential = j.at("potential");
  if (j.contains("conjugate")) c.conjugate = at_path("config.conjugate", [&] { return j.at("conjugate").get<ConjugateSpec>(); });
  if (j.contains("theorems"))
    for (const auto& t : j.at("theorems"))
      c.theorems.push_back(at_path("config.theorems", [&] { return theorem_from_string(t.get<std::string>()); }));
  c.k_split = at_path("config.k_split", [&] { return j.value("k_split", 0); });
  if (j.contains("commutators")) {
    const auto& s = j.at("commutators");
    check_keys(s, "config.commutators", {"enabled", "probes", "orders", "tolerance"});
    at_path("config.commutators", [&] {
      c.commutators.enabled = s.value("enabled", true);
      c.commutators.probes = s.value("probes", c.commutators.probes);
      c.commutators.orders = s.value("orders", c.commutators.orders);
      c.commutators.tolerance = s.value("tolerance", c.commutators.tolerance);
      return 0;
    });
  }
  if (j.contains("mourre")) {
    const auto& s = j.at("mourre");
    check_keys(s, "config.mourre", {"enabled", "c1", "S", "probes", "estimate_constants"});
    at_path("config.mourre", [&] {
      c.mourre.enabled = s.value("enabled", true);
      c.mourre.c1 = s.value("c1", 0.0);
      c.mourre.probes = s.value("probes", c.mourre.probes);
      c.mourre.estimate_constants = s.value("estimate_constants", true);
      if (s.contains("S")) {
        check_keys(s.at("S"), "config.mourre.S", {"kind", "scale"});
        c.mourre.s_kind = s.at("S").value("kind", c.mourre.s_kind);
        c.mourre.scale = s.at("S").value("scale", 1.0);
      }
      return 0;
    });
    if (c.mourre.s_kind != "auto" && c.mourre.s_kind != "laplacian" && c.mourre.s_kind != "position-decay" &&
        c.mourre.s_kind != "momentum-decay")
      throw std::invalid_argument("config.mourre.S.kind: unknown kind '" + c.mourre.s_kind + "'");
  }
  if (j.contains("eigs")) {
    const auto& s = j.at("eigs");
    check_keys(s, "config.eigs", {"enabled", "count"});
    at_path("config.eigs", [&] {
      c.eigs.enabled = s.value("enabled", true);
      c.eigs.count = s.value("count", c.eigs.count);
      return 0;
    });
  }
  if (j.contains("sweep")) {
    json s = j.at("sweep");
    check_keys(s, "config.sweep",
               {"enabled", "append_bound_states", "lambdas", "etas", "weights", "solver", "norm", "threshold"});
    c.sweep.enabled = s.value("enabled", true);
    c.sweep.append_bound_states = s.value("append_bound_states", true);
    s.erase("enabled");
    s.erase("append_bound_states");
    c.sweep.plan = at_path("config.sweep", [&] { return s.get<SweepPlan>(); });
  }
  c.seed = at_path("config.seed", [&] { return j.value("seed", c.seed); });
  c.threads = at_path("config.threads", [&] { return j.value("threads", 1); });
  c.sweep.plan.threads = c.threads;
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  std::vector<std::string> theorems;
  for (auto t : c.theorems) theorems.push_back(to_string(t));
  json sweep = c.sweep.plan;
  sweep["enabled"] = c.sweep.enabled;
  sweep["append_bound_states"] = c.sweep.append_bound_states;
  return {{"name", c.name},
          {"grid", c.grid},
          {"potential", c.potential},
          {"conjugate", c.conjugate},
          {"theorems", theorems},
          {"k_split", c.k_split},
          {"commutators",
           {{"enabled", c.commutators.enabled},
            {"probes", c.commutators.probes},
            {"orders", c.commutators.orders},
            {"tolerance", c.commutators.tolerance}}},
          {"mourre",
           {{"enabled", c.mourre.enabled},
            {"c1", c.mourre.c1},
            {"S", {{"kind", c.mourre.s_kind}, {"scale", c.mourre.scale}}},
            {"probes", c.mourre.probes},
            {"estimate_constants", c.mourre.estimate_constants}}},
          {"eigs", {{"enabled", c.eigs.enabled}, {"count", c.eigs.count}}},
          {"sweep", sweep},
          {"seed", c.seed},
          {"threads", c.threads}};
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    // The parser reports line and column in its message.
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------

LinearMap mourre_s_operator(const GridSpec& grid, const ConjugateSpec& conjugate, const MourreChoice& choice) {
  std::string kind = choice.s_kind;
  if (kind == "auto") {
    switch (conjugate.kind) {
      case ConjugateKind::Dilation: kind = "laplacian"; break;
      case ConjugateKind::PositionDecay: kind = "position-decay"; break;
      case ConjugateKind::MomentumDecay: kind = "momentum-decay"; break;
    }
  }
  LinearMap S = laplacian(grid);
  std::string tag;
  if (kind == "laplacian") {
    const double f = (2.0 - choice.c1) * choice.scale;
    S = scale(f, laplacian(grid));
    tag = json(f).dump() + "Δ";
  } else if (kind == "position-decay") {
    if (grid.n < 3) throw std::invalid_argument("position-decay S uses the Hardy constant and needs n >= 3");
    const double g = 1.0 + static_cast<double>(grid.n) / (grid.n - 2);
    const double f = 2.0 * (1.0 - conjugate.mu * g * g) * choice.scale;
    S = scale(f, sandwich(japanese_position(grid, -0.25 * conjugate.mu), laplacian(grid)));
    tag = json(f).dump() + "<q>^-mu/2 Δ <q>^-mu/2";
  } else if (kind == "momentum-decay") {
    const PointFn lambda = momentum_decay_symbol(grid, conjugate);
    const double f = 2.0 * choice.scale;
    S = momentum_multiplier(grid, "S", [lambda, f](std::span<const double> xi) {
      double k2 = 0.0;
      for (double k : xi) k2 += k * k;
      return f * k2 * lambda(xi);
    });
    tag = json(f).dump() + "Δλ(p)";
  } else {
    throw std::invalid_argument("unknown S kind '" + kind + "'");
  }
  return S.with_tag(tag);
}

StageSet StageSet::for_command(const std::string& command) {
  StageSet s;
  if (command == "run") return all();
  if (command == "check") s.checks = true;
  else if (command == "mourre") s.mourre = true;
  else if (command == "sweep") s.sweep = true;
  else if (command == "eigs") s.eigs = true;
  else throw std::invalid_argument("unknown command '" + command + "'");
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<TheoremVerdict> run_checks(const RunConfig& c, const PotentialSpec& v, Report& r) {
  TheoremParams params;
  params.n = c.grid.n;
  params.mu = c.conjugate.mu;
  params.c1 = c.mourre.c1;
  params.k_split = c.k_split;
  params.grid = c.grid;
  SamplerSettings sampler;
  sampler.seed = c.seed;
  sampler.threads = c.threads;
  const bool wants_coupling =
      std::any_of(c.theorems.begin(), c.theorems.end(),
                  [](TheoremId t) { return t == TheoremId::AU || t == TheoremId::OSC || t == TheoremId::PARTIAL; });
  if (wants_coupling && c.conjugate.kind == ConjugateKind::MomentumDecay) {
    // The "coupling small enough" lines are delegated to the numeric scan.
    const auto subspace = test_subspace(c.grid, c.mourre.probes, c.seed);
    r.work["checks.coupling_subspace"] = static_cast<double>(subspace.size());
    const CouplingScan scan = empirical_coupling(c.grid, v, c.conjugate, subspace);
    r.coupling = scan;
    params.coupling_star = scan.coupling_star;
    params.virial_constant = scan.virial_constant;
    params.second_order_constant = scan.second_order_C;
  }
  std::vector<TheoremVerdict> out;
  for (TheoremId id : c.theorems) {
    if (id == TheoremId::OSC && v.oscillating) {
      // Branch multipliers: the dilation branches scale with cap/C_observed
      // of their pointwise virial constant, the AU branch with t*.
      std::map<std::string, double> stars;
      for (auto [name, tid] : {std::pair{"BoGo", TheoremId::BoGo}, std::pair{"AF2", TheoremId::AF2}}) {
        TheoremParams p = params;
        p.n = std::max(3, p.n);
        const TheoremVerdict b = check_theorem(tid, v, p, sampler);
        const auto cap = b.constants.find("C_cap"), obs = b.constants.find("C_observed");
        if (cap != b.constants.end() && obs != b.constants.end() && std::isfinite(obs->second))
          stars[name] = obs->second > 0.0 ? cap->second / obs->second : std::numeric_limits<double>::infinity();
      }
      if (params.coupling_star) stars["AU"] = *params.coupling_star;
      out.push_back(classify_oscillating(*v.oscillating, c.grid.n, stars));
    } else {
      out.push_back(check_theorem(id, v, params, sampler));
    }
  }
  return out;
}

std::vector<CommutatorCheck> run_commutators(const RunConfig& c, const PotentialSpec& v) {
  const auto states = probe_states(c.grid, c.commutators.probes, c.seed);
  std::vector<CommutatorCheck> out;
  for (int order : c.commutators.orders) {
    CommutatorParts parts;
    parts.laplacian = true;
    const bool smooth_enough = order == 1 ? v.v1.has_gradient() : v.v1.has_hessian();
    if (v.kind != "zero" && smooth_enough) parts.potential = v.v1;
    CommutatorCheck check;
    check.order = order;
    check.tolerance = c.commutators.tolerance;
    if (v.kind != "zero" && !smooth_enough) check.note = "potential part skipped: V1 has no closed-form derivatives";
    std::optional<CommutatorPair> pair;
    try {
      pair = commutator_pair(c.grid, parts, c.conjugate, order);
    } catch (const NoClosedForm& e) {
      if (parts.potential) {
        parts.potential.reset();
        check.note = std::string("potential part skipped: ") + e.what();
        try {
          pair = commutator_pair(c.grid, parts, c.conjugate, order);
        } catch (const NoClosedForm& e2) {
          check.note = e2.what();
        }
      } else {
        check.note = e.what();
      }
    }
    if (pair) {
      check.tag = pair->tag();
      for (auto id : pair->identities) check.identities.push_back(to_string(id));
      check.deviation = cross_validate(*pair, states);
      check.status = check.deviation <= check.tolerance ? "pass" : "fail";
    } else {
      check.tag = "order " + std::to_string(order);
      check.status = "skipped";
    }
    out.push_back(std::move(check));
  }
  return out;
}

Verdict eigen_verdict(const EigenScan& scan, const RunConfig& c, bool sweep_range) {
  if (!scan.converged) return Verdict::Inconclusive;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (sweep_range && !c.sweep.plan.lambdas.empty()) {
    lo = *std::min_element(c.sweep.plan.lambdas.begin(), c.sweep.plan.lambdas.end());
    hi = *std::max_element(c.sweep.plan.lambdas.begin(), c.sweep.plan.lambdas.end());
  }
  return scan.has_bound_state_in(lo, hi) ? Verdict::Fail : Verdict::Pass;
}

}  // namespace

Report run_pipeline(const RunConfig& config, const StageSet& stages, const std::string& command) {
  config.validate();
  Report r;
  r.config = config;
  r.command = command;
  const PotentialSpec v = potential_from_json(config.potential);
  std::optional<Hamiltonian> H;
  auto hamiltonian = [&]() -> const Hamiltonian& {
    if (!H) H = build_hamiltonian(config.grid, v);
    return *H;
  };
  auto stage = [&](const char* name, auto&& body) {
    const auto t0 = Clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      r.annotations.push_back(std::string(name) + ": " + e.what());
    }
    r.seconds[name] = seconds_since(t0);
  };
  if (stages.checks) stage("checks", [&] { r.hypothesis_checks = run_checks(config, v, r); });
  if (stages.commutators && config.commutators.enabled)
    stage("commutators", [&] { r.commutator_checks = run_commutators(config, v); });
  if (stages.mourre && config.mourre.enabled)
    stage("mourre", [&] {
      const auto subspace = test_subspace(config.grid, config.mourre.probes, config.seed);
      MourreOptions opts;
      opts.kind = config.conjugate.kind;
      opts.estimate_constants = config.mourre.estimate_constants;
      opts.seed = config.seed;
      const LinearMap A = build_conjugate(config.grid, config.conjugate);
      const LinearMap S = mourre_s_operator(config.grid, config.conjugate, config.mourre);
      r.mourre_certificate = verify_weak_mourre(hamiltonian(), A, S, config.mourre.c1, subspace, opts);
      r.work["mourre.dimension"] = r.mourre_certificate->dimension;
    });
  if (stages.eigs && config.eigs.enabled)
    stage("eigs", [&] {
      EigenSettings es;
      es.seed = config.seed;
      r.eigenvalues = lowest_eigenvalues(hamiltonian(), config.eigs.count, es);
      r.eigen_verdict = eigen_verdict(*r.eigenvalues, config, config.sweep.enabled);
      r.work["eigs.iterations"] = r.eigenvalues->iterations;
    });
  if (stages.sweep && config.sweep.enabled)
    stage("sweep", [&] {
      SweepPlan plan = config.sweep.plan;
      plan.threads = config.threads;
      plan.norm.seed = config.seed;
      if (config.sweep.append_bound_states && r.eigenvalues)
        for (const auto& p : r.eigenvalues->pairs)
          if (p.bound_state && std::find(plan.lambdas.begin(), plan.lambdas.end(), p.value.real()) == plan.lambdas.end())
            plan.lambdas.push_back(p.value.real());
      r.lap_sweep = run_sweep(hamiltonian(), plan, config.conjugate);
      double iters = 0.0;
      for (const auto& row : r.lap_sweep->rows) iters += row.iterations;
      r.work["sweep.solver_iterations"] = iters;
      r.work["sweep.rows"] = static_cast<double>(r.lap_sweep->rows.size());
    });

  Verdict v_all = Verdict::Pass;
  if (!r.annotations.empty()) v_all = Verdict::Inconclusive;
  if (r.hypothesis_checks)
    for (const auto& t : *r.hypothesis_checks) v_all = combine(v_all, t.verdict);
  if (r.commutator_checks)
    for (const auto& c : *r.commutator_checks)
      if (c.status != "skipped") v_all = combine(v_all, c.status == "pass" ? Verdict::Pass : Verdict::Fail);
  if (r.mourre_certificate) v_all = combine(v_all, r.mourre_certificate->verdict);
  if (r.eigenvalues) v_all = combine(v_all, r.eigen_verdict);
  if (r.lap_sweep) v_all = combine(v_all, r.lap_sweep->verdict);
  r.verdict = v_all;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

json coupling_to_json(const CouplingScan& s) {
  return {{"virial_constant", encode_double(s.virial_constant)},
          {"coupling_star", encode_double(s.coupling_star)},
          {"second_order_C", encode_double(s.second_order_C)}};
}

CouplingScan coupling_from_json(const json& j) {
  CouplingScan s;
  s.virial_constant = decode_double(j.at("virial_constant"));
  s.coupling_star = decode_double(j.at("coupling_star"));
  s.second_order_C = decode_double(j.at("second_order_C"));
  return s;
}

json commutator_to_json(const CommutatorCheck& c) {
  return {{"tag", c.tag},         {"order", c.order},         {"identities", c.identities},
          {"deviation", encode_double(c.deviation)}, {"tolerance", c.tolerance}, {"status", c.status},
          {"note", c.note}};
}

CommutatorCheck commutator_from_json(const json& j) {
  CommutatorCheck c;
  c.tag = j.at("tag").get<std::string>();
  c.order = j.at("order").get<int>();
  c.identities = j.at("identities").get<std::vector<std::string>>();
  c.deviation = decode_double(j.at("deviation"));
  c.tolerance = j.at("tolerance").get<double>();
  c.status = j.at("status").get<std::string>();
  c.note = j.at("note").get<std::string>();
  return c;
}

}  // namespace

json report_to_json(const Report& r) {
  json j;
  j["config"] = config_to_json(r.config);
  j["command"] = r.command;
  if (r.hypothesis_checks) {
    j["hypothesis_checks"] = json::array();
    for (const auto& t : *r.hypothesis_checks) j["hypothesis_checks"].push_back(t);
  } else {
    j["hypothesis_checks"] = nullptr;
  }
  j["empirical_coupling"] = r.coupling ? coupling_to_json(*r.coupling) : json(nullptr);
  if (r.commutator_checks) {
    j["commutator_checks"] = json::array();
    for (const auto& c : *r.commutator_checks) j["commutator_checks"].push_back(commutator_to_json(c));
  } else {
    j["commutator_checks"] = nullptr;
  }
  j["mourre_certificate"] = r.mourre_certificate ? json(*r.mourre_certificate) : json(nullptr);
  if (r.eigenvalues) {
    j["eigenvalues"] = *r.eigenvalues;
    j["eigenvalues"]["verdict"] = to_string(r.eigen_verdict);
  } else {
    j["eigenvalues"] = nullptr;
  }
  j["lap_sweep"] = r.lap_sweep ? json(*r.lap_sweep) : json(nullptr);
  j["annotations"] = r.annotations;
  j["verdict"] = to_string(r.verdict);
  j["exit_code"] = exit_code(r.verdict);
  json work = json::object();
  for (const auto& [k, v] : r.work) work[k] = v;
  j["environment"] = {{"version", kVersion}, {"seed", r.config.seed}, {"threads", r.config.threads}, {"work", work},
                      {"timings", "timings.json"}};
  return j;
}

Report report_from_json(const json& j) {
  Report r;
  r.config = config_from_json(j.at("config"));
  r.command = j.at("command").get<std::string>();
  if (!j.at("hypothesis_checks").is_null()) r.hypothesis_checks = j.at("hypothesis_checks").get<std::vector<TheoremVerdict>>();
  if (!j.at("empirical_coupling").is_null()) r.coupling = coupling_from_json(j.at("empirical_coupling"));
  if (!j.at("commutator_checks").is_null()) {
    r.commutator_checks.emplace();
    for (const auto& c : j.at("commutator_checks")) r.commutator_checks->push_back(commutator_from_json(c));
  }
  if (!j.at("mourre_certificate").is_null()) r.mourre_certificate = j.at("mourre_certificate").get<MourreCertificate>();
  if (!j.at("eigenvalues").is_null()) {
    r.eigenvalues = j.at("eigenvalues").get<EigenScan>();
    r.eigen_verdict = verdict_from_string(j.at("eigenvalues").at("verdict").get<std::string>());
  }
  if (!j.at("lap_sweep").is_null()) r.lap_sweep = j.at("lap_sweep").get<SweepResult>();
  r.annotations = j.at("annotations").get<std::vector<std::string>>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  for (const auto& [k, v] : j.at("environment").at("work").items()) r.work[k] = v.get<double>();
  return r;
}

namespace {

void write_json(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' '), inner(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
      }
      os << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        write_json(os, j[i], indent + 2);
      }
      os << "\n" << pad << "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default: os << j.dump(); return;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string dump_json(const json& j) {
  std::ostringstream os;
  write_json(os, j, 0);
  os << "\n";
  return os.str();
}

void emit_report(const Report& r, const std::filesystem::path& dir, bool gnuplot) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", dump_json(report_to_json(r)));
  const SweepResult empty;
  write_sweep_csv(r.lap_sweep ? *r.lap_sweep : empty, dir / "sweep.csv");
  write_sup_csv(r.lap_sweep ? *r.lap_sweep : empty, dir / "sup_per_lambda.csv");
  json t = json::object();
  for (const auto& [k, v] : r.seconds) t[k] = v;
  write_text(dir / "timings.json", dump_json(t));
  if (gnuplot) {
    write_text(dir / "plot.gp",
               "set datafile separator ','\n"
               "set key autotitle columnhead\n"
               "set terminal pngcairo size 900,600\n"
               "set output 'sup_per_lambda.png'\n"
               "set xlabel 'lambda'\n"
               "set ylabel 'sup over eta of weighted resolvent norm'\n"
               "set logscale y\n"
               "plot 'sup_per_lambda.csv' using 1:2 with linespoints title 'sup norm'\n"
               "set output 'sweep.png'\n"
               "set ylabel 'norm'\n"
               "set cblabel 'log10 eta'\n"
               "plot 'sweep.csv' using 1:3:(log10($2)) with points palette title 'rows'\n");
  }
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 2;
    case Verdict::Inconclusive: return 3;
  }
  return 1;
}

}  // namespace lapkit
