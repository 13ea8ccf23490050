#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "vns/operators.hpp"
#include "vns/params.hpp"

#include <cmath>
#include <random>

using namespace vns;

TEST_CASE("reject delta2 below (5/2)delta1 - 3/2") {
  const ParamCheck c = check_params({1, 2, 1, 1, 2, 3});
  CHECK(c.violated == Constraint::delta2_lower_bound);
  CHECK(c.message.find("(5/2)delta1 - 3/2") != std::string::npos);
  CHECK(c.message.find("3.5") != std::string::npos);
  CHECK_THROWS_AS((void)validate_params({1, 2, 1, 1, 2, 3}), ParamError);
}

TEST_CASE("accept beta < 0 tuple with derived constants") {
  const FluidParams p = validate_params({1, 2, 1, -0.1, 1.5, 2.5});
  CHECK(p.a1 == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(p.m == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(p.a2_density_cap.has_value());
  CHECK(*p.a2_density_cap == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("gamma = 1 is rejected") {
  const ParamCheck c = check_params({1, 1, 1, 0, 2, 3.5});
  CHECK(c.violated == Constraint::gamma_gt_one);
}

TEST_CASE("beta >= 0 has no density cap") {
  CHECK_FALSE(validate_params({1, 2, 1, 0, 2, 3.5}).a2_density_cap.has_value());
  CHECK_FALSE(validate_params({1, 2, 1, 0.3, 2, 3.5}).a2_density_cap.has_value());
}

TEST_CASE("first violated constraint is named when several fail") {
  // gamma, alpha and the delta ordering all fail; gamma comes first.
  CHECK(check_params({1, 0.5, -1, 0, 2, 1}).violated == Constraint::gamma_gt_one);
  CHECK(check_params({0, 0.5, -1, 0, 2, 1}).violated == Constraint::pressure_positive);
  CHECK(check_params({1, 2, 0, 0, 0.5, 1}).violated == Constraint::alpha_positive);
  CHECK(check_params({1, 2, 1, 0, 0.5, 0.2}).violated == Constraint::delta1_gt_one);
  CHECK(check_params({1, 2, 1, 0, 2, 2}).violated == Constraint::delta2_gt_delta1);
  CHECK(check_params({1, 4, 1, 0, 4, 9}).violated == Constraint::min_delta1_gamma);
  CHECK(check_params({1, NAN, 1, 0, 2, 3.5}).violated == Constraint::finite);
  CHECK(check_params({1, 2, 1, INFINITY, 2, 3.5}).violated == Constraint::finite);
}

TEST_CASE("classification is exact at representable boundaries") {
  CHECK(check_params({1, 2, 1, 0, 1.5, 2.25}).ok());
  CHECK(check_params({1, 2, 1, 0, 1.5, std::nextafter(2.25, 0.0)}).violated == Constraint::delta2_lower_bound);
  CHECK(check_params({1, 3, 1, 0, 3, 6}).ok());
  CHECK(check_params({1, std::nextafter(3.0, 4.0), 1, 0, std::nextafter(3.0, 4.0), 7}).violated ==
        Constraint::min_delta1_gamma);
  CHECK(check_params({1, std::nextafter(1.0, 2.0), 1, 0, 2, 3.5}).ok());
}

TEST_CASE("compatibility with beta < 0: pass below the cap") {
  const FluidParams p = validate_params({1, 2, 1, -1, 1.5, 2.5});
  const Grid g(1, 16, 2.0);
  ScalarField rho = ScalarField::sample(g, [](const test::Point& x) { return 0.15 + 0.15 * std::cos(M_PI * x[0]); });
  const CompatibilityReport r = check_initial_compatibility(p, rho);
  CHECK(r.pass);
  CHECK(r.max_rho == doctest::Approx(0.3));
  CHECK(r.margin == doctest::Approx(0.7));
  CHECK(r.worst_point[0] == doctest::Approx(0.0));
}

TEST_CASE("compatibility with beta < 0: fail above the cap with location") {
  const FluidParams p = validate_params({1, 2, 1, -1, 1.5, 2.5});
  const Grid g(1, 16, 2.0);
  ScalarField rho(g, 0.1);
  rho[5] = 0.5;
  const CompatibilityReport r = check_initial_compatibility(p, rho);
  CHECK_FALSE(r.pass);
  CHECK(r.worst_index == 5);
  CHECK(r.worst_point[0] == doctest::Approx(g.coordinate(5)));
  CHECK(r.message.find("(A2)") != std::string::npos);
}

TEST_CASE("compatibility with beta >= 0 always passes with margin >= alpha") {
  const FluidParams p = validate_params({1, 2, 0.7, 0.2, 2, 3.5});
  const Grid g(1, 16, 2.0);
  const ScalarField rho = ScalarField::sample(g, [](const test::Point& x) { return 5.0 + 4.0 * std::sin(M_PI * x[0]); });
  const CompatibilityReport r = check_initial_compatibility(p, rho);
  CHECK(r.pass);
  CHECK(r.margin >= 0.7);
}

TEST_CASE("negative density is rejected by the compatibility check") {
  const FluidParams p = validate_params({1, 2, 1, 0, 2, 3.5});
  ScalarField rho(Grid(1, 8, 1.0), 0.1);
  rho[2] = -1e-3;
  CHECK_THROWS_AS((void)check_initial_compatibility(p, rho), std::invalid_argument);
}

TEST_CASE("property: accepted params have m >= 3/2 and exact derived constants") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const RawParams raw = test::random_admissible(rng);
    REQUIRE(check_params(raw).ok());
    const FluidParams p = validate_params(raw);
    CHECK(p.m >= 1.5 - 1e-12);
    CHECK(p.a1 == doctest::Approx((raw.gamma - 1) * (raw.gamma - 1) / (4 * raw.A * raw.gamma)).epsilon(1e-14));
    CHECK(p.m == doctest::Approx((raw.delta2 - raw.delta1) / (raw.delta1 - 1)).epsilon(1e-14));
    CHECK(p.a2_density_cap.has_value() == (raw.beta < 0));
  }
}

TEST_CASE("property: at the density cap the coefficient stays >= alpha/3") {
  std::mt19937_64 rng(11);
  int tested = 0;
  for (int i = 0; i < 300; ++i) {
    const RawParams raw = test::random_admissible(rng);
    if (raw.beta >= 0) continue;
    const FluidParams p = validate_params(raw);
    const Grid g(1, 32, 4.0);
    const double cap = *p.a2_density_cap;
    const ScalarField rho =
        ScalarField::sample(g, [cap](const test::Point& x) { return cap * std::exp(-x[0] * x[0]); });
    REQUIRE(check_initial_compatibility(p, rho).pass);
    const ScalarField coeff = bulk_coefficient(p, state_from_density(p, rho, VectorField(g)).vphi);
    CHECK(coeff.min() >= raw.alpha / 3.0 * (1 - 1e-12));
    ++tested;
  }
  CHECK(tested > 50);
}

TEST_CASE("property: validation is deterministic") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    RawParams raw = test::random_admissible(rng);
    raw.delta2 = std::uniform_real_distribution<double>(0.5, 8.0)(rng);
    const ParamCheck a = check_params(raw);
    const ParamCheck b = check_params(raw);
    CHECK(a.violated == b.violated);
    CHECK(a.message == b.message);
  }
}
