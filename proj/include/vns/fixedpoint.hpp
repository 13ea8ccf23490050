#pragma once

#include "vns/linearized.hpp"

#include <optional>
#include <vector>

namespace vns {

struct PicardIteration {
  int k = 0;
  double S = 0;           ///< sup_t |W^k - W^{k-1}|_2^2 + sup_t |vphi^k - vphi^{k-1}|_2^2
  double linf_delta = 0;  ///< max over samples and fields of the pointwise change
  double wall_time = 0;   ///< seconds, not part of any byte-compared output
};

struct PicardTrace {
  std::vector<PicardIteration> iterations;
  bool converged = false;
  int final_k = 0;
  double dt = 0;  ///< common step of all iterates
};

struct PicardSettings {
  double picard_tol = 1e-10;
  int max_iter = 50;
  SolverSettings solver{};
};

struct PicardResult {
  Trajectory traj;
  PicardTrace trace;
};

/// Step shared by every iterate: the CFL step of the initial data, shrunk
/// so that an integer number of steps fills T_win.
[[nodiscard]] double picard_step(const FluidParams& params, const ReformState& init, double T_win,
                                 const SolverSettings& settings);

/// Iterate 0: vphi and phi advected by u0, u held at u0.
[[nodiscard]] Trajectory picard_start(const FluidParams& params, const ReformState& init, double T_win, double dt);

/// Fixed-point iteration of the linearized problem; iterate k+1 takes its
/// coefficients (vphi~, phi~, v) from iterate k.
[[nodiscard]] PicardResult picard_solve(const FluidParams& params, const ReformState& init, double eta, double T_win,
                                        const PicardSettings& settings = {},
                                        std::shared_ptr<const ForcingSource> forcing = nullptr);

/// S metric and max pointwise change between two trajectories on one time grid.
[[nodiscard]] std::pair<double, double> picard_distance(const Trajectory& a, const Trajectory& b);

/// sup over samples of the L2 distance of (vphi, phi, u).
[[nodiscard]] double trajectory_distance(const Trajectory& a, const Trajectory& b);

struct EtaSchedule {
  double eta0 = 0.5;
  double factor = 0.5;
  int max_levels = 5;
  double cauchy_tol = 0.0;  ///< 0 runs every level

  /// Throws std::invalid_argument unless eta0 in (0,1], factor in (0,1), max_levels >= 1.
  void validate() const;
  [[nodiscard]] std::vector<double> levels() const;
};

struct ContinuationLevel {
  int j = 0;
  double eta = 0;
  PicardTrace trace;
  std::optional<double> d;  ///< distance to level j-1
};

struct ContinuationResult {
  Trajectory traj;
  std::vector<ContinuationLevel> levels;
  bool cauchy_reached = false;
};

class ContinuationError : public SolverError {
 public:
  ContinuationError(int level, double time, const std::string& what)
      : SolverError("eta level " + std::to_string(level), time, what), level_(level) {}
  [[nodiscard]] int level() const { return level_; }

 private:
  int level_;
};

[[nodiscard]] ContinuationResult eta_continuation(const FluidParams& params, const ReformState& init,
                                                  const EtaSchedule& schedule, double T_win,
                                                  const PicardSettings& settings = {},
                                                  std::shared_ptr<const ForcingSource> forcing = nullptr);

}  // namespace vns
