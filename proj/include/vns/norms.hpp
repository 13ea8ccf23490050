#pragma once

#include "vns/grid.hpp"

#include <array>

namespace vns {

/// Spectral H^s norm, s in 0..3, normalized so that s = 0 is the L2 norm.
[[nodiscard]] double sobolev_norm(const ScalarField& f, int s);
[[nodiscard]] double sobolev_norm(const VectorField& u, int s);

/// Homogeneous seminorm |grad^k f|_2 (Frobenius over ordered index tuples).
[[nodiscard]] double seminorm(const ScalarField& f, int k);
[[nodiscard]] double seminorm(const VectorField& u, int k);

/// Quadrature norms.
[[nodiscard]] double l2_norm(const ScalarField& f);
[[nodiscard]] double l2_norm(const VectorField& u);
[[nodiscard]] double linf_norm(const ScalarField& f);
[[nodiscard]] double linf_norm(const VectorField& u);
/// Quadrature integral of f over the box.
[[nodiscard]] double integral(const ScalarField& f);

/// |w grad^k u|_2 by physical-space quadrature, k in 0..4.
[[nodiscard]] double weighted_seminorm(const ScalarField& w, const VectorField& u, int k);

struct NormReport {
  std::array<double, 4> h_norms{};    ///< ||.||_s, s = 0..3
  std::array<double, 4> seminorms{};  ///< |D^k .|_2, k = 0..3 (k = 0 is L2)
  std::array<double, 5> weighted{};   ///< |w grad^k u|_2, filled for k = 2..4
  double linf = 0;
};

[[nodiscard]] NormReport norm_report(const ScalarField& f);
[[nodiscard]] NormReport norm_report(const VectorField& u, const ScalarField& weight);

}  // namespace vns
