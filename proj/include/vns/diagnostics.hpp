#pragma once

#include "vns/linearized.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vns {

inline constexpr double kVacuumEps = 1e-10;
inline constexpr double kSupportEps = 1e-12;

/// Central (interior) and one-sided second-order differences in time.
[[nodiscard]] std::vector<double> difference_weights(const std::vector<double>& times, std::size_t i,
                                                     std::size_t* first);
[[nodiscard]] ReformState time_derivative(const Trajectory& traj, std::size_t i);

struct LedgerRow {
  double t = 0;
  std::array<double, 3> vphi_h{};  ///< ||vphi||_s, s = 1..3
  std::array<double, 3> phi_h{};
  std::array<double, 3> u_h{};
  std::array<double, 3> weighted{};      ///< |vphi grad^k u|_2, k = 2..4
  std::array<double, 3> weighted_int{};  ///< running integrals of the squares
  double vphi_t_h2 = 0;
  double phi_t_h2 = 0;
  double u_t_h1 = 0;
  double u_t_d2 = 0;
  std::array<double, 3> level{};  ///< sup (||vphi||_s^2 + ||phi||_s^2 + ||u||_s^2) + int |vphi grad^{s+1} u|^2
  double ut_level = 0;            ///< sup (||u_t||_1^2 + ||phi_t||_2^2 + ||vphi_t||_2^2) + int |u_t|_{D^2}^2
  double coeff_min = 0;           ///< min alpha + beta vphi^{2m}
};

struct AprioriLedger {
  std::vector<LedgerRow> rows;
  double calib_C = 1;
  double T = 0;
  double m = 0;
  double c0 = 1;
  std::array<double, 3> c{};  ///< c1, c2, c3
  double T1 = 0;              ///< min{T, (1+c3)^{-2}}
  double T2 = 0;              ///< min{T1, (1+c3)^{-4m-2}}
  double T3 = 0;              ///< min{T2, (1+c3)^{-4m-4}}
  double T_star_star = 0;     ///< min{T, (1+c3)^{-4m-4}}
  std::array<std::optional<double>, 3> crossing;  ///< first time level s exceeds c_s^2
  std::optional<double> ut_crossing;              ///< reported only
  std::array<double, 3> max_ratio{};              ///< max over rows of level / c^2
};

/// c0 = 1 + ||vphi0||_3 + ||phi0||_3 + ||u0||_3.
[[nodiscard]] double initial_level(const ReformState& s0);

/// min{T, (1+c3)^{-4m-4}}
[[nodiscard]] double horizon(double T, double c3, double m);

/// T defaults to the trajectory duration when not positive.
[[nodiscard]] AprioriLedger ledger(const Trajectory& traj, const FluidParams& params, double calib_C, double T = 0);

/// Support of rho (> 1e-12) stays at least L/8 away from the box boundary.
[[nodiscard]] bool support_margin_ok(const ScalarField& rho, double margin_fraction = 0.125);
/// Largest |x_i| over the support of rho; 0 when empty.
[[nodiscard]] double support_extent(const ScalarField& rho);

struct ValidityVerdict {
  double t_valid = 0;
  bool valid_at_start = true;
  bool whole_window = true;
  std::vector<std::string> reasons;  ///< conditions failing at the first invalid sample
};

/// The support condition is only applied when the initial data contain vacuum.
[[nodiscard]] ValidityVerdict validity(const Trajectory& traj, const AprioriLedger& led, const FluidParams& params);

struct PrimitiveState {
  ScalarField rho;
  VectorField u;
  double time = 0;
  double gap = 0;  ///< max |vphi^{2/(delta1-1)} - phi^{2/(gamma-1)}|
};

[[nodiscard]] PrimitiveState reconstruct_primitive(const ReformState& s, const FluidParams& params);

struct VacuumResidual {
  double max = 0;
  bool no_vacuum = true;
  std::vector<double> per_sample;
};

/// max over cells with rho < vac_eps of |u_t + u.grad u|, u_t by differencing stored states.
[[nodiscard]] VacuumResidual vacuum_residual(const Trajectory& traj, const FluidParams& params,
                                             double vac_eps = kVacuumEps);

struct ConservationReport {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<std::vector<double>> momentum;  ///< per sample, dim components
  double mass_drift = 0;                      ///< max |M(t) - M(0)| / M(0)
  double momentum_drift = 0;                  ///< max |P(t) - P(0)| / int rho |u| at t0
};

[[nodiscard]] ConservationReport conservation(const Trajectory& traj, const FluidParams& params);

/// Trigonometric interpolant of a sampled field.
class SpectralInterpolant {
 public:
  explicit SpectralInterpolant(const ScalarField& f);
  [[nodiscard]] double operator()(const std::array<double, 3>& x) const;

 private:
  Grid grid_;
  std::vector<std::array<double, 3>> k_;
  std::vector<double> re_;
  std::vector<double> im_;
};

struct CharacteristicsReport {
  std::size_t traced = 0;
  std::size_t dropped = 0;
  double max_rel_error = 0;
};

/// Traces particles forward (RK4) and compares rho(t, X) with
/// rho0(x0) exp(-int div u(s, X(s)) ds).
[[nodiscard]] CharacteristicsReport characteristics_check(const Trajectory& traj, const FluidParams& params,
                                                          std::size_t n_particles, double vac_eps = kVacuumEps);

/// Right-hand sides added to the primitive equations: slot rho and slot m = rho u.
class PrimitiveForcingSource {
 public:
  virtual ~PrimitiveForcingSource() = default;
  [[nodiscard]] virtual std::pair<ScalarField, VectorField> at(double t) const = 0;
};

struct NonlinearResidual {
  double vphi = 0;  ///< max over interior samples of the L2 residual
  double phi = 0;
  double u = 0;
  double rho = 0;
  double momentum = 0;
  [[nodiscard]] double reform() const;
  [[nodiscard]] double primitive() const;
};

[[nodiscard]] NonlinearResidual nonlinear_residual(const Trajectory& traj, const FluidParams& params,
                                                   const ForcingSource* reform_forcing = nullptr,
                                                   const PrimitiveForcingSource* primitive_forcing = nullptr);

/// Primitive momentum stress divergence div T with mu = alpha rho^delta1, lambda = beta rho^delta2.
[[nodiscard]] VectorField stress_divergence(const FluidParams& params, const ScalarField& rho, const VectorField& u,
                                            Dealias dealias = Dealias::none);

}  // namespace vns
