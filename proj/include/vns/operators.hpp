#pragma once

#include "vns/calculus.hpp"
#include "vns/grid.hpp"
#include "vns/params.hpp"

#include <array>
#include <cstdint>
#include <utility>

namespace vns {

/// Reformulated unknowns at one time level:
/// vphi = rho^((delta1-1)/2), phi = rho^((gamma-1)/2), velocity u.
struct ReformState {
  ScalarField vphi;
  ScalarField phi;
  VectorField u;
  double time = 0.0;

  [[nodiscard]] const Grid& grid() const { return vphi.grid(); }
};

inline constexpr double kClipTol = 1e-12;

/// x^p for p >= 1, zero at (and below) vacuum.
[[nodiscard]] double safe_pow(double x, double p);
[[nodiscard]] ScalarField safe_pow(const ScalarField& f, double p);

/// Builds the reformulated state of a density/velocity pair.
[[nodiscard]] ReformState state_from_density(const FluidParams& params, const ScalarField& rho, const VectorField& u,
                                             double time = 0.0);

/// Zero state on a grid.
[[nodiscard]] ReformState zero_state(const Grid& grid, double time = 0.0);

/// alpha + beta vphi^{2m} pointwise.
[[nodiscard]] ScalarField bulk_coefficient(const FluidParams& params, const ScalarField& vphi);

/// Sum_j A_j(V) d_j W with V supplying (phi~, v) and W supplying (phi, u).
/// first:  v.grad(phi) + ((gamma-1)/2) phi~ div u
/// second: a1 v.grad(u) + ((gamma-1)/2) phi~ grad(phi)
[[nodiscard]] std::pair<ScalarField, VectorField> convection_apply(const FluidParams& params, const ReformState& V,
                                                                   const ReformState& W,
                                                                   Dealias dealias = Dealias::two_thirds);

/// -a1 (vphi^2 + eta^2) [alpha Lap u + (alpha + beta vphi^{2m}) grad div u]
[[nodiscard]] VectorField viscous_apply(const FluidParams& params, const ScalarField& vphi, const VectorField& u,
                                        double eta, Dealias dealias = Dealias::two_thirds);

/// (a1 alpha delta1/(delta1-1)) Q1(v) grad(vphi^2) + (a1 beta delta2/(delta2-1)) Q2(v) grad(vphi^{2m+2})
/// with Q1(v) = grad v + (grad v)^T, Q2(v) = div v I, v taken from V.
[[nodiscard]] VectorField source_apply(const FluidParams& params, const ReformState& V, const ScalarField& vphi,
                                       Dealias dealias = Dealias::two_thirds);

/// max |vphi^{2(delta2-1)/(delta1-1)} - vphi^{2m+2}| over the grid.
[[nodiscard]] double exponent_identity_gap(const FluidParams& params, const ScalarField& vphi);

/// Sum A^{pq}_{ij} xi_p xi_q zeta_i zeta_j for the 3D coefficient table of L
/// at a point where vphi^{2m} = vphi_2m.
[[nodiscard]] double quadratic_form(const FluidParams& params, double vphi_2m, const std::array<double, 3>& xi,
                                    const std::array<double, 3>& zeta);

struct EllipticityReport {
  std::size_t samples = 0;
  double min_ratio = 0;  ///< min form / (a1 alpha |xi|^2 |zeta|^2)
  double coeff_min = 0;  ///< grid min of alpha + beta vphi^{2m}
  std::uint64_t seed = 0;
  bool pass = false;
};

/// Random unit (xi, zeta) and random grid points. samples must be >= 1000.
[[nodiscard]] EllipticityReport ellipticity_check(const FluidParams& params, const ScalarField& vphi,
                                                  std::size_t samples, std::uint64_t seed = 20240611);

}  // namespace vns
