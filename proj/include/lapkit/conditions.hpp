#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lapkit/grid.hpp"
#include "lapkit/potential.hpp"
#include "lapkit/verdict.hpp"

namespace lapkit {

/// MR: Mourre with dilations on a partial variable. BoGo / AF2: dilation
/// with Hardy-type constants. AF3 / AF1D: position-decay conjugate in n >= 3
/// and in 1-D. AU: momentum-decay conjugate. PARTIAL: dilation or
/// momentum-decay in the first k coordinates. OSC: the oscillating family.
enum class TheoremId { MR, BoGo, AF2, AF3, AF1D, AU, PARTIAL, OSC };

std::string to_string(TheoremId id);
TheoremId theorem_from_string(const std::string& s);

struct HypothesisLine {
  std::string id;         // short stable key, unique within a verdict
  std::string statement;  // the inequality being tested
  std::string group;      // branch label (OSC only), else empty
  Verdict verdict = Verdict::Inconclusive;
  double observed = 0.0;
  double bound = 0.0;
  /// bound - observed for upper bounds, observed - bound for lower bounds;
  /// for plain boundedness the two-pass agreement slack 0.05 - rel_change.
  double margin = 0.0;
  bool heuristic = false;
  bool delegated = false;
  std::string note;

  bool operator==(const HypothesisLine& o) const;
};

struct TheoremVerdict {
  TheoremId id = TheoremId::MR;
  std::vector<HypothesisLine> lines;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::Inconclusive;

  const HypothesisLine* line(const std::string& id) const;
  /// Verdict restricted to one group (OSC branches).
  Verdict group_verdict(const std::string& group) const;
  bool operator==(const TheoremVerdict& o) const;
};

void to_json(nlohmann::json& j, const TheoremVerdict& v);
void from_json(const nlohmann::json& j, TheoremVerdict& v);

struct SamplerSettings {
  int shells = 200;
  double r_min = 1e-2;
  double r_max = 1e3;
  int directions = 6;
  std::uint64_t seed = 0x5EED;
  int threads = 1;
};

/// Extremes of a real function over a shell sample, with a second pass at
/// twice the shell count.
struct SampleStats {
  double sup = 0.0;
  double inf = 0.0;
  double sup_abs = 0.0;
  /// sup |f| on r in [r_max/10, r_max] and on [r_max/100, r_max/10].
  double tail_sup = 0.0;
  double decade_sup = 0.0;
  double relative_change = 0.0;
  bool converged = true;
  bool growing = false;
  std::vector<double> sup_location;
  std::optional<std::string> nonfinite_at;
};

/// Shell sample: half log-spaced radii in [r_min, r_max], half linear in
/// [r_min, min(r_max, 20)], each with the axis direction plus random unit
/// directions (signs only in 1-D). Deterministic in the seed.
std::vector<std::vector<double>> shell_points(int n, int shells, const SamplerSettings& s);

SampleStats sample_extremes(int n, const std::function<double(std::span<const double>)>& f,
                            const SamplerSettings& s);

/// sup |g(x) weight(x)| over the sample; converged iff the two passes agree
/// within 5%.
struct SupResult {
  double value = 0.0;
  bool converged = true;
  double relative_change = 0.0;
  std::optional<std::string> nonfinite_at;
};

SupResult sup_weighted(int n, const std::function<double(std::span<const double>)>& g,
                       const std::function<double(std::span<const double>)>& weight, const SamplerSettings& s);

struct TheoremParams {
  int n = 3;
  double mu = 0.0;
  double c1 = 0.0;
  /// Dimension k of the distinguished variable (first k coordinates); 0 = n.
  int k_split = 0;
  /// Grid for the operator-level Δ-bounded / Δ-compact heuristics; without
  /// it the heuristics fall back to sampled suprema and tails.
  std::optional<GridSpec> grid;
  /// Largest admissible coupling multiplier from the mourre module (the
  /// given potential is multiplier 1).
  std::optional<double> coupling_star;
  /// C' with (f,[V1,iA_u]f) >= -C' ||p lambda^{1/2} f||^2 on the subspace.
  std::optional<double> virial_constant;
  /// C with |(f,[[V,iA_u],iA_u]f)| <= C ||p lambda^{1/2} f||^2.
  std::optional<double> second_order_constant;
};

/// Branch pattern of the oscillating family from (alpha, beta) alone. Groups
/// are "BoGo", "AF2" and "AU"; each has a "w small enough" line that stays
/// inconclusive unless coupling_star holds a multiplier for that group.
TheoremVerdict classify_oscillating(const OscillatingPotential& p, int n,
                                    const std::map<std::string, double>& coupling_star = {});

TheoremVerdict check_theorem(TheoremId id, const PotentialSpec& v, const TheoremParams& params,
                             const SamplerSettings& sampler = {});

}  // namespace lapkit
