#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "vns/fixedpoint.hpp"
#include "vns/norms.hpp"

#include <cmath>

using namespace vns;
using test::Point;

namespace {

const FluidParams kP = validate_params({1.0, 2.0, 0.1, 0.02, 2.0, 3.5});

ReformState smooth_state(int n = 32) {
  const double L = 2 * M_PI;
  const Grid g(1, n, L);
  const ScalarField rho = ScalarField::sample(g, [](const Point& x) { return 1.0 + 0.1 * std::cos(x[0]); });
  VectorField u(g);
  u[0] = ScalarField::sample(g, [](const Point& x) { return 0.05 * std::sin(x[0]); });
  return state_from_density(kP, rho, u);
}

ReformState gaussian_state() {
  const double L = 8.0;
  const Grid g(1, 256, L);
  const ScalarField rho = ScalarField::sample(g, [](const Point& x) { return 0.5 * std::exp(-x[0] * x[0]); });
  VectorField u(g);
  u[0] = ScalarField::sample(g, [L](const Point& x) { return 0.1 * std::sin(2 * M_PI * x[0] / L); });
  return state_from_density(kP, rho, u);
}

}  // namespace

TEST_CASE("zero data is a fixed point after one iteration") {
  const ReformState z = zero_state(Grid(2, 16, 2.0));
  const PicardResult r = picard_solve(kP, z, 0.5, 0.1);
  CHECK(r.trace.converged);
  CHECK(r.trace.final_k == 1);
  CHECK(r.trace.iterations.front().S == 0.0);
}

TEST_CASE("argument validation") {
  const ReformState s = smooth_state();
  CHECK_THROWS_AS((void)picard_solve(kP, s, 0.5, 0.0), std::invalid_argument);
  PicardSettings ps;
  ps.max_iter = 0;
  CHECK_THROWS_AS((void)picard_solve(kP, s, 0.5, 0.01, ps), std::invalid_argument);
  CHECK_THROWS_AS(EtaSchedule({0.0, 0.5, 3, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EtaSchedule({1.5, 0.5, 3, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EtaSchedule({0.5, 1.0, 3, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EtaSchedule({0.5, 0.5, 0, 0.0}).validate(), std::invalid_argument);
  const auto lv = EtaSchedule({0.5, 0.5, 3, 0.0}).levels();
  REQUIRE(lv.size() == 3);
  CHECK(lv[2] == 0.125);
}

TEST_CASE("Picard iterates contract geometrically on a short window") {
  PicardSettings ps;
  ps.picard_tol = 1e-24;
  ps.max_iter = 8;
  const PicardResult r = picard_solve(kP, smooth_state(), 0.5, 0.01, ps);
  const auto& it = r.trace.iterations;
  REQUIRE(it.size() >= 4);
  std::vector<double> logs;
  for (const auto& x : it) {
    if (x.S > 1e-28) logs.push_back(std::log(x.S));
  }
  REQUIRE(logs.size() >= 3);
  double num = 0, den = 0;
  const double kbar = 0.5 * static_cast<double>(logs.size() - 1);
  double lbar = 0;
  for (double l : logs) lbar += l / static_cast<double>(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) {
    num += (static_cast<double>(k) - kbar) * (logs[k] - lbar);
    den += (static_cast<double>(k) - kbar) * (static_cast<double>(k) - kbar);
  }
  const double ratio = std::exp(num / den);
  CHECK(ratio < 1.0);
  for (std::size_t k = 1; k < logs.size(); ++k) CHECK(logs[k] < logs[k - 1]);
}

TEST_CASE("window scan finds a finite failing window") {
  PicardSettings ps;
  ps.picard_tol = 1e-10;
  ps.max_iter = 6;
  double failing = 0.0;
  for (double T = 0.01; T <= 10.5; T *= 2.0) {
    const PicardResult r = picard_solve(kP, smooth_state(), 0.5, T, ps);
    if (!r.trace.converged) {
      failing = T;
      break;
    }
  }
  CHECK(failing > 0.01);
}

TEST_CASE("converged trajectory is a fixed point of one more solve") {
  PicardSettings ps;
  ps.picard_tol = 1e-20;
  const double eta = 0.5, T = 0.02;
  const ReformState init = smooth_state();
  const PicardResult r = picard_solve(kP, init, eta, T, ps);
  REQUIRE(r.trace.converged);
  auto traj = std::make_shared<const Trajectory>(r.traj);
  SolverSettings s;
  s.dt_fixed = r.trace.dt;
  const FrozenCoefficients fc{std::make_shared<TrajectoryCoefficients>(traj), nullptr, eta, T};
  const Trajectory again = solve_linearized(kP, init, fc, s);
  CHECK(picard_distance(again, r.traj).first <= 10.0 * ps.picard_tol);
}

TEST_CASE("Picard solve is deterministic") {
  const PicardResult a = picard_solve(kP, smooth_state(), 0.25, 0.02);
  const PicardResult b = picard_solve(kP, smooth_state(), 0.25, 0.02);
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) CHECK(a.trace.iterations[i].S == b.trace.iterations[i].S);
  const auto& x = a.traj.back();
  const auto& y = b.traj.back();
  for (std::size_t i = 0; i < x.vphi.size(); ++i) {
    CHECK(x.vphi[i] == y.vphi[i]);
    CHECK(x.u[0][i] == y.u[0][i]);
  }
}

TEST_CASE("single-level continuation equals a Picard solve") {
  const EtaSchedule sched{0.5, 0.5, 1, 0.0};
  const ContinuationResult c = eta_continuation(kP, smooth_state(), sched, 0.02);
  const PicardResult p = picard_solve(kP, smooth_state(), 0.5, 0.02);
  REQUIRE(c.levels.size() == 1);
  CHECK_FALSE(c.levels[0].d.has_value());
  CHECK(trajectory_distance(c.traj, p.traj) == 0.0);
}

TEST_CASE("non-vacuum continuation reaches the Cauchy tolerance and matches eta = 0") {
  PicardSettings ps;
  ps.picard_tol = 1e-22;
  const double T = 0.05, tol = 2e-5;
  const EtaSchedule sched{0.5, 0.5, 5, tol};
  const ReformState init = smooth_state();
  const ContinuationResult c = eta_continuation(kP, init, sched, T, ps);
  CHECK(c.cauchy_reached);
  CHECK(c.levels.size() >= 3);
  CHECK(c.levels.size() <= 5);
  PicardSettings direct = ps;
  direct.solver.dt_fixed = picard_step(kP, init, T, ps.solver);
  const PicardResult limit = picard_solve(kP, init, 0.0, T, direct);
  REQUIRE(limit.trace.converged);
  CHECK(trajectory_distance(limit.traj, c.traj) <= 2.0 * tol);
}

TEST_CASE("vacuum-touching Gaussian: Cauchy distances decrease") {
  PicardSettings ps;
  ps.picard_tol = 1e-16;
  const ContinuationResult c = eta_continuation(kP, gaussian_state(), {0.5, 0.5, 5, 0.0}, 0.05, ps);
  REQUIRE(c.levels.size() == 5);
  for (std::size_t j = 2; j < c.levels.size(); ++j) CHECK(*c.levels[j].d < *c.levels[j - 1].d);
}
