#pragma once

#include <vector>

#include "lapkit/grid.hpp"
#include "lapkit/random.hpp"

namespace lapkit {

/// Keep Fourier modes with every |xi_a| <= fraction * pi/h; zero the rest.
void band_limit(const GridSpec& grid, Vector& v, double fraction);

/// Masked Gaussian exp(-|x-c|^2/(2 sigma^2) + i k.x), band limited to the
/// lower two thirds of the dual lattice. Radial grids reflect it to the odd
/// subspace.
Vector masked_gaussian(const GridSpec& grid, std::span<const double> center, double sigma,
                       std::span<const double> momentum);

/// Random smooth state: complex Gaussian Fourier coefficients on the band
/// |xi_a| <= fraction * pi/h under a Gaussian envelope of width L/10,
/// masked, then cut to the lower two thirds.
Vector band_limited_random(const GridSpec& grid, Rng& rng, double fraction = 0.25);

/// Modified Gram-Schmidt with one reorthogonalization pass in the grid inner
/// product; vectors whose norm drops below tol relative are discarded.
std::vector<Vector> orthonormalize(const GridSpec& grid, std::vector<Vector> vs, double tol = 1e-10);

/// Default probing family: half masked Gaussians with random centers
/// (|c| < L/8), widths in [0.5, 1.5] and small momenta, half band-limited
/// random states.
std::vector<Vector> probe_states(const GridSpec& grid, int count, std::uint64_t seed);

/// probe_states followed by orthonormalize with tolerance 1e-3; the result
/// may hold fewer than count states.
std::vector<Vector> test_subspace(const GridSpec& grid, int count, std::uint64_t seed);

}  // namespace lapkit
