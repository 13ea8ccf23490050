#pragma once

#include "vns/grid.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace vns {

/// The six model constants as read from a configuration, before any checks.
struct RawParams {
  double A = 1.0;
  double gamma = 2.0;
  double alpha = 1.0;
  double beta = 0.0;
  double delta1 = 2.0;
  double delta2 = 3.5;
};

/// Admissible model constants with the derived quantities filled in.
///
/// Pressure P = A rho^gamma, shear viscosity alpha rho^delta1, second
/// viscosity beta rho^delta2. Only obtainable through validate_params().
struct FluidParams {
  double A = 0;
  double gamma = 0;
  double alpha = 0;
  double beta = 0;
  double delta1 = 0;
  double delta2 = 0;

  double a1 = 0;  ///< (gamma-1)^2 / (4 A gamma), weight of u in the symmetrizer
  double m = 0;   ///< (delta2-delta1)/(delta1-1)
  /// Largest admissible initial density when beta < 0; empty otherwise.
  std::optional<double> a2_density_cap;

  /// alpha + beta s^{2m}, the bulk coefficient of the elliptic part.
  [[nodiscard]] double bulk_coefficient(double vphi) const;
  /// 2 A gamma / (gamma - 1), pressure coefficient of the velocity equation.
  [[nodiscard]] double pressure_coefficient() const { return 2.0 * A * gamma / (gamma - 1.0); }
  /// Acoustic speed per unit phi: (gamma-1)/(2 sqrt(a1)) = sqrt(A gamma).
  [[nodiscard]] double sound_speed_factor() const;

  [[nodiscard]] RawParams raw() const { return {A, gamma, alpha, beta, delta1, delta2}; }
};

/// Which admissibility inequality failed. Checked in declaration order.
enum class Constraint {
  none,
  finite,
  pressure_positive,  // A > 0
  gamma_gt_one,       // gamma > 1
  alpha_positive,     // alpha > 0
  delta1_gt_one,      // delta1 > 1
  delta2_gt_delta1,   // delta2 > delta1
  delta2_lower_bound, // delta2 >= (5/2) delta1 - 3/2
  min_delta1_gamma,   // min(delta1, gamma) <= 3
};

[[nodiscard]] std::string describe(Constraint c);

struct ParamCheck {
  Constraint violated = Constraint::none;
  std::string message;  ///< empty when admissible
  [[nodiscard]] bool ok() const { return violated == Constraint::none; }
};

/// Classifies raw constants against the admissible region. The comparisons
/// are carried out in exact rational arithmetic on the binary values.
[[nodiscard]] ParamCheck check_params(const RawParams& raw);

class ParamError : public std::runtime_error {
 public:
  ParamError(Constraint c, const std::string& what) : std::runtime_error(what), constraint_(c) {}
  [[nodiscard]] Constraint constraint() const { return constraint_; }

 private:
  Constraint constraint_;
};

/// Throws ParamError naming the first violated constraint.
[[nodiscard]] FluidParams validate_params(const RawParams& raw);

/// Vacuum-compatibility of an initial density with the second viscosity.
struct CompatibilityReport {
  bool pass = true;
  double margin = 0;    ///< min over the grid of alpha + beta rho0^(delta2-delta1)
  double max_rho = 0;
  std::size_t worst_index = 0;  ///< densest cell
  std::array<double, 3> worst_point{};
  std::string message;
};

/// Passes iff max rho0 <= a2_density_cap when beta < 0; always when beta >= 0.
/// Throws std::invalid_argument if rho0 has negative samples.
[[nodiscard]] CompatibilityReport check_initial_compatibility(const FluidParams& params, const ScalarField& rho0);

}  // namespace vns
