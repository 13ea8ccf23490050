#pragma once

#include "vns/gmres.hpp"
#include "vns/operators.hpp"

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vns {

/// Known coefficients of the linear problem as functions of time. The
/// returned state carries vphi~ in .vphi, phi~ in .phi and v in .u.
class CoefficientSource {
 public:
  virtual ~CoefficientSource() = default;
  [[nodiscard]] virtual ReformState at(double t) const = 0;
};

/// Additive right-hand sides (vphi, phi, u slots) of the evolution equations
/// written in time-derivative form.
class ForcingSource {
 public:
  virtual ~ForcingSource() = default;
  [[nodiscard]] virtual ReformState at(double t) const = 0;
};

/// Time-independent coefficients.
class ConstantCoefficients final : public CoefficientSource {
 public:
  explicit ConstantCoefficients(ReformState V) : V_(std::move(V)) {}
  [[nodiscard]] ReformState at(double t) const override;

 private:
  ReformState V_;
};

struct Trajectory;

/// Coefficients read off a stored trajectory, cubic Lagrange in time.
class TrajectoryCoefficients final : public CoefficientSource {
 public:
  explicit TrajectoryCoefficients(std::shared_ptr<const Trajectory> traj);
  [[nodiscard]] ReformState at(double t) const override;

 private:
  std::shared_ptr<const Trajectory> traj_;
};

struct FrozenCoefficients {
  std::shared_ptr<const CoefficientSource> source;
  std::shared_ptr<const ForcingSource> forcing;  ///< may be null
  double eta = 0.0;
  double T_win = 0.0;
};

[[nodiscard]] FrozenCoefficients freeze(const ReformState& V, double eta, double T_win);

enum class ValidityPolicy { abort, record };

struct SolverSettings {
  double cfl_safety = 0.4;
  double cfl_limit = 0.8;           ///< hard limit on the measured CFL number
  std::optional<double> dt_fixed;   ///< overrides the adaptive step
  double cadence = 0.0;             ///< sample spacing; 0 samples every step
  ValidityPolicy validity = ValidityPolicy::abort;
  GmresOptions gmres{};
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& phase, double time, const std::string& what)
      : std::runtime_error(phase + " failed at t = " + std::to_string(time) + ": " + what), phase_(phase), time_(time) {}
  [[nodiscard]] const std::string& phase() const { return phase_; }
  [[nodiscard]] double time() const { return time_; }

 private:
  std::string phase_;
  double time_;
};

class CflError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ValidityError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct StepRecord {
  double t = 0;
  double dt = 0;
  double cfl = 0;
  std::size_t clipped_vphi = 0;  ///< cells below -1e-12 before clipping
  std::size_t clipped_phi = 0;
  double clipped_mass = 0;       ///< density carried by clipped vphi, relative to total
  double coeff_min = 0;          ///< min alpha + beta vphi^{2m} after the step
  std::size_t gmres_iterations = 0;
};

struct Trajectory {
  std::vector<ReformState> states;  ///< sample times, first is the initial state
  std::vector<double> dt_history;
  std::vector<StepRecord> steps;
  std::optional<double> validity_exit_time;

  [[nodiscard]] std::vector<double> times() const;
  [[nodiscard]] const ReformState& front() const { return states.front(); }
  [[nodiscard]] const ReformState& back() const { return states.back(); }
};

/// Coefficients and forcing at the explicit stage times t, t+dt, t+dt/2.
struct StageCoefficients {
  double t = 0;
  double dt = 0;
  std::array<ReformState, 3> V;
  std::array<std::optional<ReformState>, 3> forcing;
};

[[nodiscard]] StageCoefficients stage_coefficients(const FrozenCoefficients& coeffs, double t, double dt);

/// -v.grad(vphi) - ((delta1-1)/2) vphi~ div v (+ forcing).
[[nodiscard]] ScalarField transport_rhs(const FluidParams& params, const ScalarField& vphi, const ReformState& V,
                                        const ReformState* forcing = nullptr);

/// SSP-RK3 stages of vphi: values at t, t+dt, t+dt/2 and the new value.
struct TransportStages {
  std::array<ScalarField, 3> stage;
  ScalarField next;
  std::size_t clipped = 0;
  double clipped_mass = 0;
};

[[nodiscard]] TransportStages transport_step(const FluidParams& params, const ScalarField& vphi,
                                             const StageCoefficients& sc);
[[nodiscard]] TransportStages transport_step(const FluidParams& params, const ScalarField& vphi,
                                             const FrozenCoefficients& coeffs, double t, double dt);

/// (vphi^2 + eta^2) [alpha Lap u + (alpha + beta vphi^{2m}) grad div u], the
/// viscous rate in time-derivative form.
[[nodiscard]] VectorField viscous_rate(const FluidParams& params, const ScalarField& vphi, const VectorField& u,
                                       double eta);

struct MomentumResult {
  ScalarField phi;
  VectorField u;
  std::size_t clipped = 0;
  std::size_t gmres_iterations = 0;
};

/// One IMEX step of (phi, u): transport, pressure and source terms explicit,
/// the variable-coefficient viscous term implicit. vphi enters through the
/// stage values of the already advanced transport step.
[[nodiscard]] MomentumResult momentum_step(const FluidParams& params, const ScalarField& phi, const VectorField& u,
                                           const StageCoefficients& sc, const TransportStages& vphi, double eta,
                                           const GmresOptions& gmres = {});

/// Stable step for the given coefficients: cfl_safety h / (sqrt(dim)(max|v| + c max phi~) + eps).
[[nodiscard]] double cfl_step(const FluidParams& params, const ReformState& V, double cfl_safety);
/// dt sqrt(dim)(max|v| + c max phi~) / h
[[nodiscard]] double cfl_number(const FluidParams& params, const ReformState& V, double dt);

/// Runs transport then momentum steps to T_win.
[[nodiscard]] Trajectory solve_linearized(const FluidParams& params, const ReformState& init,
                                          const FrozenCoefficients& coeffs, const SolverSettings& settings = {});

/// Samples at (approximately) the given spacing, always keeping the ends.
[[nodiscard]] Trajectory subsample(const Trajectory& traj, double cadence);

}  // namespace vns
