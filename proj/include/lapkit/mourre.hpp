#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lapkit/conjugate.hpp"
#include "lapkit/potential.hpp"
#include "lapkit/verdict.hpp"

namespace lapkit {

/// Numeric evidence for the weak Mourre estimate on a finite test subspace.
struct MourreCertificate {
  double c1 = 0.0;
  std::string s_tag;
  std::string a_tag;
  GridSpec grid;
  int dimension = 0;
  /// lambda_min of the Gram matrix of [Re H, iA] - c1 Re H - S.
  double gap = 0.0;
  /// lambda_min of the Gram matrix of S.
  double injectivity = 0.0;
  /// Largest |eigenvalue| of the commutator Gram matrix; sets tol_gap.
  double form_norm = 0.0;
  double tol_gap = 0.0;
  /// max |(f,[[H,iA],iA]f)| / (f,Sf); NaN when not estimated.
  double second_order_C = std::numeric_limits<double>::quiet_NaN();
  /// max |(H^-f,Ag) - (Af,H^+g)| / (||f|| ||(H^+ + i)g||); NaN when not estimated.
  double b7_c = std::numeric_limits<double>::quiet_NaN();
  /// lambda_min of the Gram matrix of Im H (>= 0 for dissipative H).
  double dissipativity = 0.0;
  /// lambda_min of c1 [Im H, iA]; NaN when c1 = 0 (the condition is vacuous).
  double im_commutator = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> reasons;
};

/// Verdict and reasons recomputed from the numeric fields alone.
std::pair<Verdict, std::vector<std::string>> certificate_verdict(const MourreCertificate& c);

void to_json(nlohmann::json& j, const MourreCertificate& c);
void from_json(const nlohmann::json& j, MourreCertificate& c);

struct MourreOptions {
  /// Kind of the conjugate; when unset, inferred from the tag of A.
  std::optional<ConjugateKind> kind;
  bool estimate_constants = true;
  int b7_probes = 32;
  std::uint64_t seed = 0x5EED;
  int min_dimension = 8;
};

/// Gram-matrix check of [Re H, iA] - c1 Re H >= S > 0 on span(subspace).
/// c1 > 0 requires the dilation conjugate; S must be flagged Hermitian.
MourreCertificate verify_weak_mourre(const Hamiltonian& H, const LinearMap& A, const LinearMap& S, double c1,
                                     const std::vector<Vector>& subspace, const MourreOptions& options = {});

struct RatioEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  int used = 0;
  int skipped = 0;
};

/// Largest observed |(H^-f, Ag) - (Af, H^+g)| / (||f|| ||(H^+ + i) g||)
/// over random masked band-limited pairs; pairs with a denominator below
/// 1e-14 are skipped and counted.
RatioEstimate estimate_b7(const Hamiltonian& H, const LinearMap& A, int probes, std::uint64_t seed = 0x5EED);

struct SecondOrderEstimate {
  /// Max over individual probes of |(f, ad^2 f)| / (f, S f).
  double individual = std::numeric_limits<double>::quiet_NaN();
  /// Same ratio maximized over the probe span (generalized eigenproblem,
  /// S-modes below 1e-10 relative dropped).
  double span = std::numeric_limits<double>::quiet_NaN();
  int skipped = 0;
  bool inconclusive() const { return std::isnan(individual); }
  double value() const { return std::isnan(span) ? individual : span; }
};

SecondOrderEstimate estimate_second_order_C(const LinearMap& T, const LinearMap& A, const LinearMap& S,
                                            const std::vector<Vector>& probes);

/// Largest t with G_S + t G_K >= 0 on the span, where G_K is the Gram matrix
/// of [V1, iA] and S = Δλ(p); equals 1/C' for the virial constant C'
/// with (f,[V1,iA]f) >= -C'(f,Δλ(p)f). Infinite when C' <= 0.
struct CouplingScan {
  double virial_constant = 0.0;
  double coupling_star = std::numeric_limits<double>::infinity();
  double second_order_C = std::numeric_limits<double>::quiet_NaN();
};

CouplingScan empirical_coupling(const GridSpec& grid, const PotentialSpec& v, const ConjugateSpec& spec,
                                const std::vector<Vector>& subspace);

/// Hermitian part of the Gram matrix (u_i, X u_j).
Matrix gram(const LinearMap& X, const std::vector<Vector>& basis);

/// Eigenvalues of the pencil (G, B) on the range of B (B-modes below
/// cutoff relative are dropped).
Eigen::VectorXd pencil_eigenvalues(const Matrix& G, const Matrix& B, double cutoff = 1e-10);

}  // namespace lapkit
