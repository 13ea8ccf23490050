#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "vns/linearized.hpp"
#include "vns/norms.hpp"

#include <cmath>
#include <random>

using namespace vns;
using test::Point;

namespace {

const FluidParams kP = validate_params({1.0, 2.0, 0.5, 0.0, 2.0, 3.5});

ScalarField sample1(const Grid& g, const std::function<double(double)>& f) {
  return ScalarField::sample(g, [&f](const Point& x) { return f(x[0]); });
}

SolverSettings fixed_dt(double dt) {
  SolverSettings s;
  s.dt_fixed = dt;
  return s;
}

}  // namespace

TEST_CASE("zero velocity leaves vphi unchanged") {
  std::mt19937_64 rng(1);
  const Grid g(2, 16, 2.0);
  ReformState V = zero_state(g);
  V.vphi = test::random_trig(rng, 2, 3, 2.0, 1.0, 0.5).sample(g);
  const ScalarField vphi = dealias(test::random_trig(rng, 2, 3, 2.0, 1.0, 0.5).sample(g));
  const TransportStages ts = transport_step(kP, vphi, freeze(V, 0.5, 1.0), 0.0, 0.1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(ts.next[i] == doctest::Approx(vphi[i]).epsilon(1e-14));
}

TEST_CASE("transport rhs closed form") {
  const Grid g(1, 32, 2 * M_PI);
  const double a = 0.7, dt = 1e-3;
  ReformState V = zero_state(g);
  V.vphi = ScalarField(g, 1.0);
  V.u[0] = sample1(g, [a](double x) { return a * std::sin(x); });
  const ScalarField one(g, 1.0);
  const ScalarField r = transport_rhs(kP, one, V);
  const TransportStages ts = transport_step(kP, one, freeze(V, 0.5, 1.0), 0.0, dt);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(static_cast<int>(i));
    const double expect = -0.5 * (kP.delta1 - 1.0) * a * std::cos(x);
    CHECK(std::abs(r[i] - expect) < 1e-12);
    CHECK(std::abs(ts.stage[1][i] - (1.0 + dt * expect)) < 1e-12);
  }
}

TEST_CASE("constant advection is translation at third order in time") {
  const double L = 2 * M_PI, c = 0.5, T = 1.0;
  const Grid g(1, 64, L);
  const auto f0 = [](double x) { return std::exp(std::cos(x)); };
  ReformState V = zero_state(g);
  V.u[0] = ScalarField(g, c);
  ReformState init = zero_state(g);
  init.vphi = sample1(g, f0);
  const ScalarField exact = sample1(g, [&](double x) { return f0(x - c * T); });
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    const Trajectory tr = solve_linearized(kP, init, freeze(V, 0.5, T), fixed_dt(dt));
    err.push_back(l2_norm(tr.back().vphi - exact));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double order = std::log2(err[i - 1] / err[i]);
    CHECK(order == doctest::Approx(3.0).epsilon(0.1));
  }
}

TEST_CASE("zero data with zero coefficients stays zero") {
  std::mt19937_64 rng(2);
  const Grid g(2, 16, 2.0);
  ReformState init = zero_state(g);
  init.vphi = test::random_trig(rng, 2, 3, 2.0, 1.0, 0.5).sample(g);
  const Trajectory tr = solve_linearized(kP, init, freeze(zero_state(g), 0.3, 0.2), fixed_dt(0.05));
  for (const auto& s : tr.states) {
    CHECK(s.phi.max_abs() == 0.0);
    CHECK(s.u.max_norm() == 0.0);
  }
}

TEST_CASE("fully degenerate cells freeze the velocity") {
  std::mt19937_64 rng(3);
  const Grid g(2, 16, 2.0);
  ReformState init = zero_state(g);
  init.phi = test::random_trig(rng, 2, 3, 2.0, 1.0, 0.5).sample(g);
  init.u[0] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  init.u[1] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  const Trajectory tr = solve_linearized(kP, init, freeze(zero_state(g), 0.0, 0.2), fixed_dt(0.05));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(tr.back().u[0][i] == init.u[0][i]);
    CHECK(tr.back().u[1][i] == init.u[1][i]);
    CHECK(tr.back().phi[i] == init.phi[i]);
  }
}

TEST_CASE("divergence-free mode decays at the viscous rate") {
  const double L = 2 * M_PI, w = 0.8, k = 2.0, T = 0.5;
  const Grid g(2, 32, L);
  ReformState V = zero_state(g);
  V.vphi = ScalarField(g, w);
  ReformState init = zero_state(g);
  init.vphi = ScalarField(g, w);
  init.u[0] = ScalarField::sample(g, [k](const Point& x) { return std::sin(k * x[1]); });
  const Trajectory tr = solve_linearized(kP, init, freeze(V, 0.0, T), fixed_dt(0.005));
  const double rate = -std::log(l2_norm(tr.back().u) / l2_norm(init.u)) / T;
  const double expect = kP.alpha * w * w * k * k;
  CHECK(rate == doctest::Approx(expect).epsilon(0.01));
  CHECK(tr.back().u[1].max_abs() < 1e-14);
}

TEST_CASE("window shorter than one step yields initial state plus one step") {
  const Grid g(1, 16, 1.0);
  ReformState init = zero_state(g);
  init.vphi = ScalarField(g, 0.5);
  const Trajectory tr = solve_linearized(kP, init, freeze(zero_state(g), 0.5, 1e-3), fixed_dt(0.01));
  REQUIRE(tr.states.size() == 2);
  CHECK(tr.back().time == doctest::Approx(1e-3));
  CHECK(tr.dt_history.size() == 1);
}

TEST_CASE("argument validation") {
  const Grid g(1, 16, 1.0);
  const ReformState z = zero_state(g);
  CHECK_THROWS_AS((void)solve_linearized(kP, z, freeze(z, 0.5, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS((void)solve_linearized(kP, z, freeze(z, 1.5, 0.1)), std::invalid_argument);
}

TEST_CASE("superposition in the (phi, u) slots") {
  std::mt19937_64 rng(4);
  const double L = 2.0;
  const Grid g(2, 16, L);
  ReformState V = zero_state(g);
  V.vphi = test::random_trig(rng, 2, 2, L, 1.0, 0.3).sample(g);
  V.phi = test::random_trig(rng, 2, 2, L, 0.5, 0.2).sample(g);
  V.u[0] = test::random_trig(rng, 2, 2, L, 0.0, 0.3).sample(g);
  V.u[1] = test::random_trig(rng, 2, 2, L, 0.0, 0.3).sample(g);
  const ScalarField vphi0 = test::random_trig(rng, 2, 2, L, 1.0, 0.3).sample(g);
  const auto random_w = [&](ReformState& s) {
    s.vphi = vphi0;
    s.phi = test::random_trig(rng, 2, 2, L, 2.0, 0.3).sample(g);
    s.u[0] = test::random_trig(rng, 2, 2, L, 0.0, 0.5).sample(g);
    s.u[1] = test::random_trig(rng, 2, 2, L, 0.0, 0.5).sample(g);
  };
  // phi stays well above zero so clipping never engages.
  ReformState a = zero_state(g), b = zero_state(g), z = zero_state(g);
  random_w(a);
  random_w(b);
  random_w(z);
  ReformState ab = a;
  ab.phi = a.phi + b.phi - z.phi;
  ab.u = a.u + b.u - z.u;
  const FrozenCoefficients fc = freeze(V, 0.5, 0.05);
  const SolverSettings s = fixed_dt(0.01);
  const ReformState ra = solve_linearized(kP, a, fc, s).back();
  const ReformState rb = solve_linearized(kP, b, fc, s).back();
  const ReformState rz = solve_linearized(kP, z, fc, s).back();
  const ReformState rab = solve_linearized(kP, ab, fc, s).back();
  const double scale = l2_norm(rab.u) + l2_norm(rab.phi);
  CHECK(l2_norm(rab.phi + rz.phi - ra.phi - rb.phi) <= 1e-9 * scale);
  CHECK(l2_norm(rab.u + rz.u - ra.u - rb.u) <= 1e-9 * scale);
}

TEST_CASE("negative undershoot is clipped and counted") {
  const Grid g(1, 16, 1.0);
  ScalarField vphi(g, 0.5);
  vphi[3] = -1e-6;
  vphi[5] = -1e-14;
  const TransportStages ts = transport_step(kP, vphi, freeze(zero_state(g), 0.5, 1.0), 0.0, 0.01);
  CHECK(ts.next[3] == 0.0);
  CHECK(ts.next[5] == 0.0);
  CHECK(ts.clipped == 1);
  CHECK(ts.clipped_mass > 0.0);
}

TEST_CASE("CFL violation raises") {
  const Grid g(1, 16, 1.0);
  ReformState V = zero_state(g);
  V.u[0] = ScalarField(g, 1.0);
  ReformState init = zero_state(g);
  init.vphi = ScalarField(g, 1.0);
  CHECK_THROWS_AS((void)solve_linearized(kP, init, freeze(V, 0.5, 0.5), fixed_dt(0.1)), CflError);
  const double dt = cfl_step(kP, V, 0.4);
  CHECK(cfl_number(kP, V, dt) == doctest::Approx(0.4));
}

TEST_CASE("validity policy") {
  const FluidParams p = validate_params({1.0, 2.0, 1.0, -1.0, 2.0, 3.5});
  const Grid g(1, 16, 1.0);
  ReformState init = zero_state(g);
  init.vphi = ScalarField(g, 0.9);  // alpha + beta 0.9^3 = 0.271
  SolverSettings s = fixed_dt(0.01);
  CHECK_THROWS_AS((void)solve_linearized(p, init, freeze(init, 0.5, 0.05), s), ValidityError);
  s.validity = ValidityPolicy::record;
  const Trajectory tr = solve_linearized(p, init, freeze(init, 0.5, 0.05), s);
  REQUIRE(tr.validity_exit_time.has_value());
  CHECK(*tr.validity_exit_time == doctest::Approx(0.01));
}

TEST_CASE("vacuum data stays nonnegative") {
  const double L = 8.0;
  const Grid g(1, 512, L);
  ReformState init = zero_state(g);
  const auto bump = [](double x) { return std::abs(x) < 2.0 ? 0.5 * std::exp(1.0 - 1.0 / (1.0 - x * x / 4.0)) : 0.0; };
  const ScalarField rho = sample1(g, bump);
  VectorField u(g);
  u[0] = sample1(g, [L](double x) { return 0.1 * std::sin(2 * M_PI * x / L); });
  init = state_from_density(kP, rho, u);
  const Trajectory tr = solve_linearized(kP, init, freeze(init, 0.5, 0.05), SolverSettings{});
  for (const auto& s : tr.states) {
    CHECK(s.vphi.min() >= 0.0);
    CHECK(s.phi.min() >= 0.0);
  }
  for (const auto& st : tr.steps) CHECK(st.clipped_mass <= 1e-10);
}

TEST_CASE("cadence sampling keeps both ends") {
  const Grid g(1, 16, 1.0);
  ReformState init = zero_state(g);
  init.vphi = ScalarField(g, 0.5);
  SolverSettings s = fixed_dt(0.003);
  s.cadence = 0.01;
  const Trajectory tr = solve_linearized(kP, init, freeze(zero_state(g), 0.5, 0.05), s);
  const auto t = tr.times();
  REQUIRE(t.size() == 6);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(0.01 * static_cast<double>(i)));
}
