#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "vns/operators.hpp"

#include <cmath>
#include <random>

using namespace vns;
using test::Point;
using test::TrigPoly;

namespace {

FluidParams params_of(double A, double gamma, double alpha, double beta, double d1, double d2) {
  return validate_params({A, gamma, alpha, beta, d1, d2});
}

const FluidParams kBase = params_of(1.3, 1.7, 0.8, -0.2, 2.0, 3.5);  // m = 1.5

std::vector<Point> random_points(std::mt19937_64& rng, double L, int dim, int count = 10) {
  std::uniform_real_distribution<double> u(-0.5 * L, 0.5 * L);
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    Point x{0, 0, 0};
    for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = u(rng);
    pts.push_back(x);
  }
  return pts;
}

ScalarField sample1(const Grid& g, const std::function<double(double)>& f) {
  return ScalarField::sample(g, [&f](const Point& x) { return f(x[0]); });
}

}  // namespace

TEST_CASE("safe_pow") {
  CHECK(safe_pow(0.0, 2.0) == 0.0);
  CHECK(safe_pow(-1e-13, 3.0) == 0.0);
  CHECK(safe_pow(4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(safe_pow(2.0, 3.0) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("convection vanishes when V has no velocity and no phi") {
  std::mt19937_64 rng(1);
  const Grid g(2, 16, 2.0);
  const ReformState V = zero_state(g);
  ReformState W = zero_state(g);
  W.phi = test::random_trig(rng, 2, 3, 2.0, 0.5, 1.0).sample(g);
  W.u[0] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  W.u[1] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  const auto [first, second] = convection_apply(kBase, V, W);
  CHECK(first.max_abs() == 0.0);
  CHECK(second.max_norm() == 0.0);
}

TEST_CASE("pressure coefficient identity") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const FluidParams p = validate_params(test::random_admissible(rng));
    CHECK((p.gamma - 1.0) / (2.0 * p.a1) == doctest::Approx(p.pressure_coefficient()).epsilon(1e-13));
  }
}

TEST_CASE("convection matches a single-mode symbolic evaluation") {
  const double L = 2 * M_PI;
  const Grid g(1, 32, L);
  const double p0 = 0.7, p1 = 0.2, v1 = 0.4, q1 = 0.3, w1 = -0.6;
  const double gg = 0.5 * (kBase.gamma - 1.0);
  ReformState V = zero_state(g), W = zero_state(g);
  V.phi = sample1(g, [&](double x) { return p0 + p1 * std::cos(x); });
  V.u[0] = sample1(g, [&](double x) { return v1 * std::sin(x); });
  W.phi = sample1(g, [&](double x) { return q1 * std::sin(x); });
  W.u[0] = sample1(g, [&](double x) { return w1 * std::cos(x); });
  const auto [first, second] = convection_apply(kBase, V, W, Dealias::none);
  std::mt19937_64 rng(11);
  for (const Point& pt : random_points(rng, L, 1)) {
    const double x = pt[0];
    const double pt_phi = p0 + p1 * std::cos(x);
    const double f = v1 * std::sin(x) * q1 * std::cos(x) + gg * pt_phi * (-w1 * std::sin(x));
    const double s = kBase.a1 * v1 * std::sin(x) * (-w1 * std::sin(x)) + gg * pt_phi * q1 * std::cos(x);
    CHECK(std::abs(interpolate(first, pt) - f) < 1e-10);
    CHECK(std::abs(interpolate(second[0], pt) - s) < 1e-10);
  }
}

TEST_CASE("source vanishes for constant vphi or zero velocity") {
  std::mt19937_64 rng(2);
  const Grid g(2, 16, 2.0);
  ReformState V = zero_state(g);
  V.u[0] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  V.u[1] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  CHECK(source_apply(kBase, V, ScalarField(g, 0.8)).max_norm() < 1e-13);
  const ScalarField vphi = test::random_trig(rng, 2, 3, 2.0, 1.0, 0.5).sample(g);
  CHECK(source_apply(kBase, zero_state(g), vphi).max_norm() == 0.0);
}

TEST_CASE("source matches a single-mode symbolic evaluation") {
  const double L = 2 * M_PI;
  const Grid g(1, 32, L);
  const double c = 1.0, b = 0.3, a = 0.5;
  ReformState V = zero_state(g);
  V.u[0] = sample1(g, [&](double x) { return a * std::sin(x); });
  const ScalarField vphi = sample1(g, [&](double x) { return c + b * std::cos(x); });
  const VectorField out = source_apply(kBase, V, vphi, Dealias::none);
  const double c1 = kBase.a1 * kBase.alpha * kBase.delta1 / (kBase.delta1 - 1.0);
  const double c2 = kBase.a1 * kBase.beta * kBase.delta2 / (kBase.delta2 - 1.0);
  // The second gradient is of vphi^(2(delta2-1)/(delta1-1)), written without m.
  const double e = 2.0 * (kBase.delta2 - 1.0) / (kBase.delta1 - 1.0);
  std::mt19937_64 rng(12);
  for (const Point& pt : random_points(rng, L, 1)) {
    const double x = pt[0];
    const double w = c + b * std::cos(x), dw = -b * std::sin(x), dv = a * std::cos(x);
    const double expect = c1 * 2.0 * dv * (2.0 * w * dw) + c2 * dv * (e * std::pow(w, e - 1.0) * dw);
    CHECK(std::abs(interpolate(out[0], pt) - expect) < 1e-10);
  }
}

TEST_CASE("viscous operator is degenerate at vacuum") {
  std::mt19937_64 rng(4);
  const Grid g(2, 16, 2.0);
  VectorField u(g);
  u[0] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  u[1] = test::random_trig(rng, 2, 3, 2.0, 0.0, 1.0).sample(g);
  CHECK(viscous_apply(kBase, ScalarField(g), u, 0.0).max_norm() == 0.0);
  CHECK_THROWS((void)viscous_apply(kBase, ScalarField(g), u, -0.1));
}

TEST_CASE("viscous operator on a divergence-free mode is a weighted heat operator") {
  std::mt19937_64 rng(5);
  const double L = 2 * M_PI;
  const Grid g(2, 32, L);
  VectorField u(g);
  u[0] = ScalarField::sample(g, [](const Point& x) { return std::sin(2 * x[1]); });
  const ScalarField vphi = test::random_trig(rng, 2, 2, L, 1.0, 0.5).sample(g);
  const double eta = 0.3;
  for (double beta : {-0.3, 0.0, 2.0}) {
    const FluidParams p = params_of(1.0, 2.0, 0.7, beta, 2.0, 3.5);
    const VectorField out = viscous_apply(p, vphi, u, eta, Dealias::none);
    const VectorField lap = laplacian(u);
    for (int i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double expect = -p.a1 * (vphi[k] * vphi[k] + eta * eta) * p.alpha * lap[i][k];
        CHECK(out[i][k] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("viscous symbol for constant vphi in 1D") {
  const double L = 2 * M_PI;
  const Grid g(1, 32, L);
  const double w = 0.8;
  const FluidParams& p = kBase;
  for (int k = 1; k <= 5; ++k) {
    VectorField u(g);
    u[0] = sample1(g, [k](double x) { return std::cos(k * x); });
    const VectorField out = viscous_apply(p, ScalarField(g, w), u, 0.0, Dealias::none);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      num += out[0][i] * u[0][i];
      den += u[0][i] * u[0][i];
    }
    const double symbol = p.a1 * w * w * (2 * p.alpha + p.beta * std::pow(w, 2 * p.m)) * k * k;
    CHECK(std::abs(num / den - symbol) < 1e-10);
  }
}

TEST_CASE("symmetric form agrees with the componentwise velocity equation") {
  std::mt19937_64 rng(99);
  const double L = 2.0;
  const Grid g(2, 64, L);
  for (int trial = 0; trial < 5; ++trial) {
    const FluidParams p = validate_params(test::random_admissible(rng));
    const TrigPoly vphi_p = test::random_trig(rng, 2, 2, L, 1.0, 0.4);
    const TrigPoly phit_p = test::random_trig(rng, 2, 2, L, 0.8, 0.4);
    const TrigPoly phi_p = test::random_trig(rng, 2, 2, L, 0.8, 0.4);
    const std::array<TrigPoly, 2> v_p{test::random_trig(rng, 2, 2, L, 0.0, 1.0), test::random_trig(rng, 2, 2, L, 0.0, 1.0)};
    const std::array<TrigPoly, 2> u_p{test::random_trig(rng, 2, 2, L, 0.0, 1.0), test::random_trig(rng, 2, 2, L, 0.0, 1.0)};
    const double eta = 0.25;

    ReformState V = zero_state(g), W = zero_state(g);
    V.phi = phit_p.sample(g);
    W.phi = phi_p.sample(g);
    for (int i = 0; i < 2; ++i) {
      V.u[i] = v_p[static_cast<std::size_t>(i)].sample(g);
      W.u[i] = u_p[static_cast<std::size_t>(i)].sample(g);
    }
    const ScalarField vphi = vphi_p.sample(g);
    const auto conv = convection_apply(p, V, W, Dealias::none).second;
    const VectorField visc = viscous_apply(p, vphi, W.u, eta, Dealias::none);
    const VectorField src = source_apply(p, V, vphi, Dealias::none);

    const double k1 = p.alpha * p.delta1 / (p.delta1 - 1.0);
    const double k2 = p.beta * p.delta2 / (p.delta2 - 1.0);
    double scale = 0.0, worst = 0.0;
    for (std::size_t n = 0; n < g.size(); n += 7) {
      const Point x = g.point(n);
      const double w = vphi_p.value(x);
      const double w2m = std::pow(w, 2 * p.m);
      double div_u = 0, div_v = 0;
      for (int j = 0; j < 2; ++j) {
        div_u += u_p[static_cast<std::size_t>(j)].d(j, x);
        div_v += v_p[static_cast<std::size_t>(j)].d(j, x);
      }
      for (int i = 0; i < 2; ++i) {
        const auto si = static_cast<std::size_t>(i);
        double lhs = 0.0;
        for (int j = 0; j < 2; ++j) lhs += v_p[static_cast<std::size_t>(j)].value(x) * u_p[si].d(j, x);
        lhs += p.pressure_coefficient() * phit_p.value(x) * phi_p.d(i, x);
        double lap = 0, graddiv = 0;
        for (int j = 0; j < 2; ++j) {
          lap += u_p[si].dd(j, j, x);
          graddiv += u_p[static_cast<std::size_t>(j)].dd(i, j, x);
        }
        lhs -= (w * w + eta * eta) * (p.alpha * lap + (p.alpha + p.beta * w2m) * graddiv);
        double rhs = 0.0;
        for (int j = 0; j < 2; ++j) {
          const auto sj = static_cast<std::size_t>(j);
          rhs += 2.0 * w * vphi_p.d(j, x) * k1 * (v_p[si].d(j, x) + v_p[sj].d(i, x));
        }
        rhs += (2 * p.m + 2) * std::pow(w, 2 * p.m + 1) * vphi_p.d(i, x) * k2 * div_v;
        const double sym = (conv[i][n] + visc[i][n] - src[i][n]) / p.a1;
        scale = std::max(scale, std::abs(lhs - rhs));
        worst = std::max(worst, std::abs(sym - (lhs - rhs)));
      }
    }
    CHECK(worst <= 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("exponent identity on random fields") {
  std::mt19937_64 rng(6);
  const Grid g(2, 16, 2.0);
  for (int t = 0; t < 20; ++t) {
    const FluidParams p = validate_params(test::random_admissible(rng));
    ScalarField vphi = test::random_trig(rng, 2, 3, 2.0, 0.6, 1.0).sample(g);
    for (std::size_t i = 0; i < vphi.size(); ++i) vphi[i] = std::max(vphi[i], 0.0);
    const double top = std::pow(std::max(vphi.max(), 1e-300), 2 * p.m + 2);
    CHECK(exponent_identity_gap(p, vphi) <= 1e-13 * std::max(1.0, top));
  }
}

TEST_CASE("quadratic form examples") {
  const FluidParams p = params_of(1.0, 2.0, 1.0, -1.0, 1.5, 2.5);
  const Point e1{1, 0, 0}, e2{0, 1, 0};
  CHECK(quadratic_form(p, 0.5, e1, e1) / p.a1 == doctest::Approx(1.5).epsilon(1e-15));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const FluidParams q = validate_params(test::random_admissible(rng));
    CHECK(quadratic_form(q, u01(rng), e1, e2) / (q.a1 * q.alpha) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("ellipticity with beta = 0 always passes") {
  std::mt19937_64 rng(8);
  const Grid g(2, 16, 2.0);
  const FluidParams p = params_of(1.0, 1.4, 0.3, 0.0, 1.7, 3.0);
  const ScalarField vphi = test::random_trig(rng, 2, 3, 2.0, 1.0, 1.5).sample(g);
  const EllipticityReport r = ellipticity_check(p, vphi, 5000, 3);
  CHECK(r.pass);
  CHECK(r.min_ratio >= 1.0);
  CHECK(r.coeff_min == doctest::Approx(0.3));
}

TEST_CASE("ellipticity report is reproducible and validates its sample count") {
  const Grid g(1, 16, 1.0);
  const ScalarField vphi(g, 0.7);
  const auto a = ellipticity_check(kBase, vphi, 2000, 42);
  const auto b = ellipticity_check(kBase, vphi, 2000, 42);
  CHECK(a.min_ratio == b.min_ratio);
  CHECK(a.seed == 42);
  CHECK(a.samples == 2000);
  CHECK_THROWS_AS((void)ellipticity_check(kBase, vphi, 999), std::invalid_argument);
}

TEST_CASE("ellipticity holds in the half-coefficient regime") {
  std::mt19937_64 rng(10);
  const Grid g(2, 16, 2.0);
  int tested = 0;
  while (tested < 10) {
    const FluidParams p = validate_params(test::random_admissible(rng));
    ScalarField vphi = test::random_trig(rng, 2, 3, 2.0, 0.6, 0.8).sample(g);
    for (std::size_t i = 0; i < vphi.size(); ++i) vphi[i] = std::max(vphi[i], 0.0);
    if (bulk_coefficient(p, vphi).min() < 0.5 * p.alpha) continue;
    const auto r = ellipticity_check(p, vphi, 10000, 5 + static_cast<std::uint64_t>(tested));
    CHECK(r.pass);
    ++tested;
  }
}
