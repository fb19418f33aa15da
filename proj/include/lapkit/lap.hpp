#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lapkit/conjugate.hpp"
#include "lapkit/krylov.hpp"
#include "lapkit/potential.hpp"
#include "lapkit/verdict.hpp"

namespace lapkit {

/// identity: no weights. dilation: |q|^-1. position-decay: <q>^{-mu/2}|q|^-1.
/// momentum-decay: <p>^{-mu/2}|q|^-1. partial: |q_x|^-1, times <p_x>^{-mu/2}
/// when mu > 0. s-inverse-sqrt: S^{-1/2} on both sides. s-conjugate:
/// S^{-1/2}A on the left and S^{-1/2} on the right.
enum class WeightKind { Identity, Dilation, PositionDecay, MomentumDecay, Partial, SInverseSqrt, SConjugate };

std::string to_string(WeightKind k);
WeightKind weight_kind_from_string(const std::string& s);

struct WeightChoice {
  WeightKind kind = WeightKind::Dilation;
  double mu = 0.0;
  /// 0-based coordinates of the distinguished variable (partial weights).
  std::vector<int> coords;
};

void to_json(nlohmann::json& j, const WeightChoice& w);
void from_json(const nlohmann::json& j, WeightChoice& w);

struct WeightPair {
  LinearMap left;
  LinearMap right;
};

/// S-weights use S = [Δ, iA] in its Fourier-diagonal free form (2|xi|^2 for
/// the dilation, 2|xi|^2 lambda(xi) for momentum decay) with S-modes below
/// 1e-10 of the maximum dropped; other conjugates are refused.
WeightPair realize_weights(const GridSpec& grid, const WeightChoice& w, const ConjugateSpec& conjugate);

struct NormSettings {
  int steps = 40;
  std::uint64_t seed = 0x5EED;
  double stagnation = 1e-6;
};

struct ResolventNorm {
  double norm = 0.0;
  int iterations = 0;
  int restarts = 0;
  int power_steps = 0;
  /// Largest final relative residual over all inner solves.
  double residual = 0.0;
  bool converged = true;
};

/// ||Wl (H - lambda + i eta)^{-1} Wr|| by Lanczos on M^*M with full
/// reorthogonalization, Ritz value over all iterates; every
/// inner solve runs preconditioned GMRES with the free resolvent
/// (|xi|^2 - lambda +- i eta)^{-1}.
ResolventNorm weighted_resolvent_norm(const Hamiltonian& H, double lambda, double eta, const LinearMap& Wl,
                                      const LinearMap& Wr, const SolverSettings& solver = {},
                                      const NormSettings& norm = {}, bool adjoint_first = false);

struct SweepPlan {
  std::vector<double> lambdas;
  /// Strictly decreasing, positive.
  std::vector<double> etas{1e-1, 1e-2, 1e-3, 1e-4};
  WeightChoice weights;
  /// Relative residual 1e-8: at an eigenvalue the attainable residual is
  /// about eps ||H|| / eta, which exceeds 1e-10 at eta = 1e-4.
  SolverSettings solver = [] {
    SolverSettings s;
    s.tol = 1e-8;
    return s;
  }();
  NormSettings norm;
  double threshold = 3.0;
  int threads = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const SweepPlan& p);
void from_json(const nlohmann::json& j, SweepPlan& p);

struct SweepRow {
  double lambda = 0.0;
  double eta = 0.0;
  double norm = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool valid = false;
};

struct LambdaTrend {
  double lambda = 0.0;
  /// norm(eta_min) / norm(next larger eta); NaN when either row is invalid.
  double ratio = 0.0;
  double sup_norm = 0.0;
  /// "bounded", "blow-up" or "invalid".
  std::string verdict;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<LambdaTrend> trends;
  double global_sup = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> invalid_lambdas;
  std::vector<double> blow_up_lambdas;
};

void to_json(nlohmann::json& j, const SweepResult& r);
void from_json(const nlohmann::json& j, SweepResult& r);

/// Rows run in parallel over lambda; results are ordered by (lambda, eta)
/// as in the plan, independent of the worker count.
SweepResult run_sweep(const Hamiltonian& H, const SweepPlan& plan, const ConjugateSpec& conjugate);

/// Blow-up iff ratio > threshold; any invalid row makes the sweep inconclusive.
void assign_verdicts(SweepResult& r, double threshold, const std::vector<double>& etas);

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path);
void write_sup_csv(const SweepResult& r, const std::filesystem::path& path);

struct EigenSettings {
  int max_iterations = 300;
  double tol = 1e-9;
  int extra_vectors = 4;
  std::uint64_t seed = 0x5EED;
  /// Eigenvectors with at least this much mass in |x| > L/2 count as box
  /// modes of the truncated continuum, not bound states.
  double outer_mass_limit = 0.05;
};

struct EigenPair {
  std::complex<double> value;
  double residual = 0.0;
  double outer_mass = 0.0;
  bool bound_state = false;
};

struct EigenScan {
  std::vector<EigenPair> pairs;
  bool converged = false;
  int iterations = 0;
  bool has_bound_state_in(double lo, double hi) const;
};

void to_json(nlohmann::json& j, const EigenScan& s);
void from_json(const nlohmann::json& j, EigenScan& s);

/// m eigenvalues of smallest real part by block shift-invert subspace
/// iteration below the spectrum (shift min V1 - 1), Rayleigh-Ritz each sweep.
/// Bound state: real part below -tol, or outer mass under the limit.
EigenScan lowest_eigenvalues(const Hamiltonian& H, int m, const EigenSettings& settings = {});

}  // namespace lapkit
