#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapkit/conjugate.hpp"
#include "lapkit/field.hpp"
#include "lapkit/linear_map.hpp"

namespace lapkit {

/// Raised when no closed-form commutator is available for a request;
/// callers fall back to discrete_commutator.
class NoClosedForm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form commutator identities, by role.
enum class Identity {
  LaplacianDilation,         // [Δ, iA_D] = 2Δ
  LaplacianPositionDecay,    // [Δ, iA_F] = 2 p F'(q) p - F'''(q)/2 (vector-field form in n-D)
  LaplacianPositionFactored, // 2<q>^{-mu/2}(Δ - mu A_D <q>^{-2} A_D)<q>^{-mu/2}, leading order only
  LaplacianMomentumDecay,    // [Δ, iA_u] = 2Δ lambda(p)
  PotentialDilation,         // [V, iA_D] = -q.grad V
  PotentialPositionDecay,    // [V, iA_F] = -F(q).grad V
  LaplacianDilation2,        // [[Δ, iA_D], iA_D] = 4Δ
  PotentialDilation2,        // -iG(q.p) + i(p.q)G - nG with G = q.grad V
  PotentialDilation2Multiplier, // (q.grad)^2 V
  LaplacianPositionDecay2,   // 2[p(2F'^2 - F F'')p - (F'''F' + F''^2)/2] + F F''''/2
  PotentialPositionDecay2,   // (F.grad)^2 V
  LaplacianMomentumDecay2,   // lambda(xi) xi.grad(2|xi|^2 lambda(xi))
};

std::string to_string(Identity id);

/// Operator parts entering an analytic commutator.
struct CommutatorParts {
  bool laplacian = false;
  std::optional<ScalarField> potential;
  /// Use the factored leading-order A_F expression instead of the exact one.
  bool factored = false;
};

struct CommutatorPair {
  LinearMap discrete;
  LinearMap analytic;
  std::vector<Identity> identities;
  std::string tag() const;
};

/// order 1: i(TA - AT) = [T, iA]; order 2: [[T, iA], iA].
LinearMap discrete_commutator(const LinearMap& T, const LinearMap& A, int order);

/// The closed form for (parts, spec, order), summed over parts. Throws
/// NoClosedForm for unsupported combinations and std::invalid_argument
/// when a needed derivative closure is missing.
LinearMap analytic_commutator(const GridSpec& grid, const CommutatorParts& parts, const ConjugateSpec& spec,
                              int order, std::vector<Identity>* used = nullptr);

/// Builds T from the parts (Δ + V), A from spec, and both commutator forms.
CommutatorPair commutator_pair(const GridSpec& grid, const CommutatorParts& parts, const ConjugateSpec& spec,
                               int order);

/// max over states of ||(D - A) f|| / max(||D f||, ||A f||, eps).
double cross_validate(const CommutatorPair& pair, const std::vector<Vector>& states, double eps = 1e-300);

/// Operator norms of ad^p (p = 1..kmax) by 30-step power iteration, seed 0x5EED,
/// seen through the interior mask and the band |xi_a| <= pi/(2h).
std::vector<double> regularity_probe(const LinearMap& T, const LinearMap& A, int kmax, int steps = 30,
                                     std::uint64_t seed = 0x5EED);

struct RegularityTrend {
  std::vector<double> coarse;
  std::vector<double> fine;
  /// fine/coarse per order; growth above the threshold is evidence against
  /// boundedness (heuristic).
  std::vector<double> ratio;
  std::vector<bool> growing;
};

/// Runs regularity_probe on grid and on grid with N doubled.
RegularityTrend regularity_trend(
    const GridSpec& grid, const std::function<std::pair<LinearMap, LinearMap>(const GridSpec&)>& build, int kmax,
    double growth_threshold = 1.5);

/// The operator T = Δ + V (V as a position multiplier; omitted parts skipped).
LinearMap assemble_parts(const GridSpec& grid, const CommutatorParts& parts);

}  // namespace lapkit
