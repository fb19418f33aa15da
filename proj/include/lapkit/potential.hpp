#pragma once

#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "lapkit/field.hpp"
#include "lapkit/operators.hpp"

namespace lapkit {

/// Order-7 smoothstep on [0, 1]: 0 -> 0, 1 -> 1, first three derivatives
/// vanishing at both ends.
double smoothstep7(double t);
double smoothstep7_d1(double t);
double smoothstep7_d2(double t);

/// Cutoff kappa: 1 on [0, 1], 1 - smoothstep7(r - 1) on [1, 2], 0 beyond.
double cutoff(double r);
double cutoff_d1(double r);
double cutoff_d2(double r);

/// w (1 - kappa(|x|)) sin(k |x|^alpha) / |x|^beta.
struct OscillatingPotential {
  double w = 0.01;
  double k = 1.0;
  double alpha = 2.0;
  double beta = 3.0;

  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
};

struct OscillatingSample {
  double value = 0.0;
  /// x . grad W from its closed form.
  double radial_first_commutator = 0.0;
};

/// Value and x.grad W at a point; the cutoff region (and x = 0) gives (0, 0).
OscillatingSample eval_oscillating(const OscillatingPotential& p, std::span<const double> x);

/// Named potential: real part V1, optional non-negative imaginary part V2,
/// decay metadata, and the JSON it was built from.
struct PotentialSpec {
  std::string kind = "zero";
  nlohmann::json params = nlohmann::json::object();
  ScalarField v1;
  std::optional<ScalarField> v2;
  /// Claimed decay exponent of V1 (|V1| <~ |x|^-decay), NaN when unknown.
  double claimed_decay = std::numeric_limits<double>::quiet_NaN();
  std::optional<OscillatingPotential> oscillating;

  std::string tag() const { return v1.tag; }
};

/// Kinds: zero, oscillating {w,k,alpha,beta}, power {amplitude, decay},
/// gaussian {amplitude, width}, well {depth, radius}, product {factors:
/// [{coords, ...radial kind}]}; an "imaginary" member builds V2 the same way.
PotentialSpec potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PotentialSpec& p);

PotentialSpec zero_potential();
PotentialSpec oscillating_potential(const OscillatingPotential& p);

/// H = (Δ + V1) + i V2 with both parts Hermitian.
struct Hamiltonian {
  LinearMap re;
  LinearMap im;
  bool has_imaginary = false;

  const GridSpec& grid() const { return re.grid(); }
  /// re + i im as one (non-Hermitian) map.
  LinearMap full() const;
};

Hamiltonian build_hamiltonian(const GridSpec& grid, const PotentialSpec& potential);

}  // namespace lapkit
