#pragma once

#include "vns/grid.hpp"

#include <array>

namespace vns {

/// Derivative orders per axis, e.g. {2,0,0} is d^2/dx0^2.
using MultiIndex = std::array<int, 3>;

/// Spectral filtering applied to derivative multipliers.
///
/// two_thirds zeroes every mode with |k| >= n/3 on some axis, the 2/3 rule.
/// The solvers always differentiate with two_thirds; products are formed
/// pointwise from filtered factors.
enum class Dealias { none, two_thirds };

inline constexpr int kMaxDerivativeOrder = 4;

/// Fourier-multiplier derivative. Exact for band-limited fields; odd orders
/// drop the Nyquist coefficient. Throws std::invalid_argument if the total
/// order exceeds 4 or an axis beyond the grid dimension is requested.
[[nodiscard]] ScalarField derivative(const ScalarField& f, const MultiIndex& order, Dealias dealias = Dealias::none);

[[nodiscard]] VectorField gradient(const ScalarField& f, Dealias dealias = Dealias::none);
[[nodiscard]] ScalarField divergence(const VectorField& u, Dealias dealias = Dealias::none);
[[nodiscard]] ScalarField laplacian(const ScalarField& f, Dealias dealias = Dealias::none);
[[nodiscard]] VectorField laplacian(const VectorField& u, Dealias dealias = Dealias::none);
[[nodiscard]] VectorField grad_div(const VectorField& u, Dealias dealias = Dealias::none);

/// Jacobian J[i][j] = d u_i / d x_j.
[[nodiscard]] std::vector<std::vector<ScalarField>> jacobian(const VectorField& u, Dealias dealias = Dealias::none);

/// (w . grad) f for a vector of advecting velocities w.
[[nodiscard]] ScalarField advect(const VectorField& w, const ScalarField& f, Dealias dealias = Dealias::none);

/// 2/3-rule projection of a field (drops the outer third of the spectrum).
[[nodiscard]] ScalarField dealias(const ScalarField& f);

/// Trigonometric interpolant evaluated at an arbitrary point (periodic).
[[nodiscard]] double interpolate(const ScalarField& f, const std::array<double, 3>& x);

/// Band-limited resampling onto a grid with the same box and dimension.
/// Refinement zero-pads the spectrum; coarsening truncates it.
[[nodiscard]] ScalarField resample(const ScalarField& f, const Grid& target);
[[nodiscard]] VectorField resample(const VectorField& u, const Grid& target);

}  // namespace vns
