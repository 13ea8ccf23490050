#pragma once

#include "vns/diagnostics.hpp"
#include "vns/fixedpoint.hpp"

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vns {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// rho* = rho_bar (1 + eps sin(k.x - omega t)), u*_i = U_i cos(k.x + nu t).
/// k must be a lattice wavenumber of the box for periodicity.
struct ManufacturedCase {
  double rho_bar = 1.0;
  double eps = 0.1;
  std::array<double, 3> k{1.0, 0.0, 0.0};
  double omega = 1.0;
  std::array<double, 3> U{0.1, 0.0, 0.0};
  double nu = 1.0;

  [[nodiscard]] ScalarField rho(const Grid& g, double t) const;
  [[nodiscard]] ScalarField rho_t(const Grid& g, double t) const;
  [[nodiscard]] VectorField u(const Grid& g, double t) const;
  [[nodiscard]] VectorField u_t(const Grid& g, double t) const;
  /// Exact reformulated state.
  [[nodiscard]] ReformState state(const FluidParams& p, const Grid& g, double t) const;
  [[nodiscard]] ReformState state_t(const FluidParams& p, const Grid& g, double t) const;
  /// Forcing that makes the exact fields solve the reformulated system.
  [[nodiscard]] ReformState reform_forcing(const FluidParams& p, const Grid& g, double t) const;
  /// Forcing (rho slot, momentum slot) of the primitive system.
  [[nodiscard]] std::pair<ScalarField, VectorField> primitive_forcing(const FluidParams& p, const Grid& g,
                                                                       double t) const;
};

class ManufacturedCoefficients final : public CoefficientSource {
 public:
  ManufacturedCoefficients(ManufacturedCase c, FluidParams p, Grid g) : c_(c), p_(p), g_(g) {}
  [[nodiscard]] ReformState at(double t) const override { return c_.state(p_, g_, t); }

 private:
  ManufacturedCase c_;
  FluidParams p_;
  Grid g_;
};

class ManufacturedForcing final : public ForcingSource {
 public:
  ManufacturedForcing(ManufacturedCase c, FluidParams p, Grid g) : c_(c), p_(p), g_(g) {}
  [[nodiscard]] ReformState at(double t) const override { return c_.reform_forcing(p_, g_, t); }

 private:
  ManufacturedCase c_;
  FluidParams p_;
  Grid g_;
};

class ManufacturedPrimitiveForcing final : public PrimitiveForcingSource {
 public:
  ManufacturedPrimitiveForcing(ManufacturedCase c, FluidParams p, Grid g) : c_(c), p_(p), g_(g) {}
  [[nodiscard]] std::pair<ScalarField, VectorField> at(double t) const override {
    return c_.primitive_forcing(p_, g_, t);
  }

 private:
  ManufacturedCase c_;
  FluidParams p_;
  Grid g_;
};

struct OracleSettings {
  double cfl_safety = 0.4;
  std::optional<double> dt_fixed;
  /// Times to land on and record; empty records every step.
  std::vector<double> sample_times;
};

struct PrimitiveTrajectory {
  std::vector<PrimitiveState> states;
  std::vector<double> dt_history;
};

/// Stable explicit step: min of the acoustic limit and 0.4 h^2 / (dim nu_max).
[[nodiscard]] double oracle_step(const FluidParams& params, const ScalarField& rho, const VectorField& u,
                                 double cfl_safety);

/// Conservative (rho, rho u) method of lines, RK4 in time. Requires min rho0 > 0.
[[nodiscard]] PrimitiveTrajectory primitive_solve(const ScalarField& rho0, const VectorField& u0,
                                                  const FluidParams& params, double T_win,
                                                  const OracleSettings& settings = {},
                                                  std::shared_ptr<const PrimitiveForcingSource> forcing = nullptr);

struct CrossCompareReport {
  std::vector<double> times;
  std::vector<double> distance;  ///< L2 distance of (rho, u) per sample
  double sup_distance = 0;
  double amplitude = 0;  ///< max|rho0 - mean rho0| + max|u0|
  PicardTrace trace;
  double oracle_mass_drift = 0;
  double reform_mass_drift = 0;
};

/// Picard at eta = 0 against primitive_solve on the Picard sample times.
[[nodiscard]] CrossCompareReport cross_compare(const ScalarField& rho0, const VectorField& u0,
                                               const FluidParams& params, double T_win,
                                               const PicardSettings& picard = {});

struct MmsOrders {
  std::vector<double> orders;  ///< log2(e_N / e_2N) per consecutive pair
  std::vector<bool> flagged;   ///< degenerate or non-monotone pair
  [[nodiscard]] bool any_flagged() const;
};

/// Throws std::invalid_argument with fewer than two errors.
[[nodiscard]] MmsOrders mms_orders(const std::vector<double>& errors);

/// Final-time L2 error of (vphi, phi, u) of the linearized solver with exact
/// manufactured coefficients and eta = 0, for each dt.
[[nodiscard]] std::vector<double> mms_reform_errors(const ManufacturedCase& c, const FluidParams& p, const Grid& g,
                                                    double T, const std::vector<double>& dts);
/// Final-time L2 error of (rho, u) of the primitive solver for each dt.
[[nodiscard]] std::vector<double> mms_oracle_errors(const ManufacturedCase& c, const FluidParams& p, const Grid& g,
                                                    double T, const std::vector<double>& dts);

struct SpatialResidual {
  double reform = 0;     ///< relative L2 mismatch of the filtered semi-discrete rates
  double primitive = 0;
};

/// Semi-discrete residual of the exact manufactured fields at time t,
/// relative to the size of the time derivative.
[[nodiscard]] SpatialResidual mms_spatial_residual(const ManufacturedCase& c, const FluidParams& p, const Grid& g,
                                                   double t);

}  // namespace vns
