#include "vns/fixedpoint.hpp"

#include "vns/norms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace vns {

namespace {

double sq(double x) { return x * x; }

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_same_times(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) throw std::invalid_argument("trajectories have different sample counts");
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const double ta = a.states[i].time;
    const double tb = b.states[i].time;
    if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta))) {
      throw std::invalid_argument("trajectories are sampled at different times");
    }
  }
}

}  // namespace

double picard_step(const FluidParams& params, const ReformState& init, double T_win, const SolverSettings& settings) {
  if (settings.dt_fixed) return *settings.dt_fixed;
  const double dt = cfl_step(params, init, settings.cfl_safety);
  const double steps = std::max(1.0, std::ceil(T_win / dt - 1e-9));
  return T_win / steps;
}

Trajectory picard_start(const FluidParams& params, const ReformState& init, double T_win, double dt) {
  ReformState V = zero_state(init.grid(), init.time);
  V.u = init.u;
  const FrozenCoefficients coeffs = freeze(V, 0.0, T_win);
  Trajectory traj;
  traj.states.push_back(init);
  ReformState state = init;
  const double t_end = init.time + T_win;
  double t = init.time;
  while (t < t_end) {
    double h = dt;
    bool last = false;
    if (t + h >= t_end - 1e-9 * h) {
      h = t_end - t;
      last = true;
    }
    const StageCoefficients sc = stage_coefficients(coeffs, t, h);
    state.vphi = transport_step(params, state.vphi, sc).next;
    state.phi = transport_step(params, state.phi, sc).next;
    t = last ? t_end : t + h;
    state.time = t;
    traj.dt_history.push_back(h);
    traj.states.push_back(state);
  }
  return traj;
}

std::pair<double, double> picard_distance(const Trajectory& a, const Trajectory& b) {
  require_same_times(a, b);
  double sup_w = 0.0;
  double sup_vphi = 0.0;
  double linf = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const ReformState& x = a.states[i];
    const ReformState& y = b.states[i];
    const double dphi = sq(l2_norm(x.phi - y.phi));
    const double du = sq(l2_norm(x.u - y.u));
    sup_w = std::max(sup_w, dphi + du);
    sup_vphi = std::max(sup_vphi, sq(l2_norm(x.vphi - y.vphi)));
    linf = std::max({linf, max_abs_diff(x.vphi, y.vphi), max_abs_diff(x.phi, y.phi)});
    for (int d = 0; d < x.u.dim(); ++d) linf = std::max(linf, max_abs_diff(x.u[d], y.u[d]));
  }
  return {sup_w + sup_vphi, linf};
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  require_same_times(a, b);
  double sup = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const ReformState& x = a.states[i];
    const ReformState& y = b.states[i];
    sup = std::max(sup, std::sqrt(sq(l2_norm(x.vphi - y.vphi)) + sq(l2_norm(x.phi - y.phi)) + sq(l2_norm(x.u - y.u))));
  }
  return sup;
}

PicardResult picard_solve(const FluidParams& params, const ReformState& init, double eta, double T_win,
                          const PicardSettings& settings, std::shared_ptr<const ForcingSource> forcing) {
  if (!(T_win > 0.0)) throw std::invalid_argument("time window must be positive");
  if (settings.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  PicardResult result;
  const double dt = picard_step(params, init, T_win, settings.solver);
  result.trace.dt = dt;
  SolverSettings solver = settings.solver;
  solver.dt_fixed = dt;
  solver.cadence = 0.0;

  auto previous = std::make_shared<const Trajectory>(picard_start(params, init, T_win, dt));
  for (int k = 1; k <= settings.max_iter; ++k) {
    const auto start = std::chrono::steady_clock::now();
    FrozenCoefficients coeffs{std::make_shared<TrajectoryCoefficients>(previous), forcing, eta, T_win};
    Trajectory next = solve_linearized(params, init, coeffs, solver);
    const auto [S, linf] = picard_distance(next, *previous);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.iterations.push_back({k, S, linf, wall});
    result.trace.final_k = k;
    previous = std::make_shared<const Trajectory>(std::move(next));
    if (S <= settings.picard_tol) {
      result.trace.converged = true;
      break;
    }
  }
  result.traj = *previous;
  return result;
}

void EtaSchedule::validate() const {
  if (!(eta0 > 0.0 && eta0 <= 1.0)) throw std::invalid_argument("eta0 must lie in (0, 1]");
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("eta factor must lie in (0, 1)");
  if (max_levels < 1) throw std::invalid_argument("eta schedule needs at least one level");
  if (!(cauchy_tol >= 0.0)) throw std::invalid_argument("cauchy_tol must be nonnegative");
}

std::vector<double> EtaSchedule::levels() const {
  std::vector<double> out;
  double eta = eta0;
  for (int j = 0; j < max_levels; ++j) {
    out.push_back(eta);
    eta *= factor;
  }
  return out;
}

ContinuationResult eta_continuation(const FluidParams& params, const ReformState& init, const EtaSchedule& schedule,
                                    double T_win, const PicardSettings& settings,
                                    std::shared_ptr<const ForcingSource> forcing) {
  schedule.validate();
  ContinuationResult result;
  const auto levels = schedule.levels();
  // One time grid for every level so consecutive levels compare sample by sample.
  PicardSettings ps = settings;
  ps.solver.dt_fixed = picard_step(params, init, T_win, settings.solver);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const int level = static_cast<int>(j);
    PicardResult pr;
    try {
      pr = picard_solve(params, init, levels[j], T_win, ps, forcing);
    } catch (const SolverError& e) {
      throw ContinuationError(level, e.time(), e.what());
    }
    if (!pr.trace.converged) {
      throw ContinuationError(level, init.time + T_win,
                              "Picard iteration did not converge in " + std::to_string(settings.max_iter) + " iterations");
    }
    ContinuationLevel lev{level, levels[j], pr.trace, std::nullopt};
    if (j > 0) lev.d = trajectory_distance(pr.traj, result.traj);
    result.levels.push_back(lev);
    result.traj = std::move(pr.traj);
    if (lev.d && schedule.cauchy_tol > 0.0 && *lev.d <= schedule.cauchy_tol) {
      result.cauchy_reached = true;
      break;
    }
  }
  return result;
}

}  // namespace vns
