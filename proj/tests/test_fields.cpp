#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "vns/calculus.hpp"
#include "vns/norms.hpp"
#include "vns/snapshot.hpp"
#include "vns/spectral.hpp"

#include <cmath>
#include <cstring>
#include <random>

using namespace vns;
using test::Point;

namespace {

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScalarField random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::vector<double> v(g.size());
  for (auto& x : v) x = n01(rng);
  return ScalarField(g, std::move(v));
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS((void)Grid(1, 4, 1.0));
  CHECK_THROWS((void)Grid(1, 24, 1.0));
  CHECK_THROWS((void)Grid(4, 8, 1.0));
  CHECK_THROWS((void)Grid(2, 8, 0.0));
  const Grid g(2, 16, 3.0);
  CHECK(g.size() == 256);
  CHECK(g.spacing() == doctest::Approx(3.0 / 16));
  CHECK(g.point(17)[0] == doctest::Approx(-1.5 + 3.0 / 16));
  CHECK(g.point(17)[1] == doctest::Approx(-1.5 + 3.0 / 16));
}

TEST_CASE("fields reject non-finite samples and mismatched grids") {
  const Grid g(1, 8, 1.0);
  std::vector<double> v(8, 1.0);
  v[3] = NAN;
  CHECK_THROWS((void)ScalarField(g, v));
  CHECK_THROWS((void)ScalarField(g, std::vector<double>(7, 0.0)));
  ScalarField a(g, 1.0);
  const ScalarField b(Grid(1, 16, 1.0), 1.0);
  CHECK_THROWS_AS(a += b, GridMismatch);
}

TEST_CASE("derivative of a constant vanishes") {
  const Grid g(2, 16, 5.0);
  const ScalarField c(g, 3.7);
  for (const MultiIndex& o : {MultiIndex{1, 0, 0}, MultiIndex{0, 2, 0}, MultiIndex{2, 2, 0}, MultiIndex{1, 3, 0}}) {
    CHECK(derivative(c, o).max_abs() < 1e-12);
  }
}

TEST_CASE("derivative of a single mode") {
  const double L = 3.0;
  const Grid g(1, 32, L);
  const double k = 2 * M_PI / L;
  const ScalarField f = ScalarField::sample(g, [k](const Point& x) { return std::sin(k * x[0]); });
  const ScalarField df = ScalarField::sample(g, [k](const Point& x) { return k * std::cos(k * x[0]); });
  CHECK(max_diff(derivative(f, {1, 0, 0}), df) < 1e-13);
  const ScalarField d4 = ScalarField::sample(g, [k](const Point& x) { return std::pow(k, 4) * std::sin(k * x[0]); });
  CHECK(max_diff(derivative(f, {4, 0, 0}), d4) < 1e-10 * std::pow(k, 4));
}

TEST_CASE("derivative order limits") {
  const Grid g(2, 8, 1.0);
  const ScalarField f(g, 1.0);
  CHECK_THROWS_AS((void)derivative(f, {3, 2, 0}), std::invalid_argument);
  CHECK_THROWS_AS((void)derivative(f, {-1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS((void)derivative(f, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("product rule for band-limited factors") {
  std::mt19937_64 rng(5);
  const double L = 2.0;
  const Grid g(2, 32, L);
  const auto pf = test::random_trig(rng, 2, 3, L, 0.3, 1.0);
  const auto pg = test::random_trig(rng, 2, 3, L, -0.2, 1.0);
  const ScalarField f = dealias(pf.sample(g));
  const ScalarField h = dealias(pg.sample(g));
  const ScalarField lhs = laplacian(hadamard(f, h));
  ScalarField rhs = hadamard(f, laplacian(h)) + hadamard(h, laplacian(f));
  rhs.axpy(2.0, dot(gradient(f), gradient(h)));
  CHECK(max_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("linearity of derivatives") {
  std::mt19937_64 rng(9);
  const Grid g(2, 16, 1.0);
  const ScalarField f = random_field(g, rng);
  const ScalarField h = random_field(g, rng);
  for (const MultiIndex& o : {MultiIndex{1, 0, 0}, MultiIndex{1, 1, 0}, MultiIndex{0, 3, 0}}) {
    const ScalarField lhs = derivative(2.5 * f + (-1.5) * h, o);
    const ScalarField rhs = 2.5 * derivative(f, o) + (-1.5) * derivative(h, o);
    CHECK(max_diff(lhs, rhs) < 1e-9 * std::max(1.0, lhs.max_abs()));
  }
}

TEST_CASE("two-thirds filter") {
  const Grid g(1, 32, 2 * M_PI);
  const ScalarField lo = ScalarField::sample(g, [](const Point& x) { return std::cos(10 * x[0]); });
  const ScalarField hi = ScalarField::sample(g, [](const Point& x) { return std::cos(11 * x[0]); });
  CHECK(max_diff(dealias(lo), lo) < 1e-13);
  CHECK(dealias(hi).max_abs() < 1e-13);
  // d/dx with the filter drops the same modes.
  CHECK(derivative(hi, {1, 0, 0}, Dealias::two_thirds).max_abs() < 1e-12);
}

TEST_CASE("sobolev norm of a constant") {
  const Grid g(3, 8, 2.0);
  const ScalarField c(g, -1.5);
  for (int s = 0; s <= 3; ++s) CHECK(sobolev_norm(c, s) == doctest::Approx(1.5 * std::sqrt(8.0)).epsilon(1e-13));
}

TEST_CASE("L2 norm of sin over one period") {
  const double L = 5.0;
  const Grid g(1, 64, L);
  const ScalarField f = ScalarField::sample(g, [L](const Point& x) { return std::sin(2 * M_PI * x[0] / L); });
  CHECK(sobolev_norm(f, 0) == doctest::Approx(std::sqrt(L / 2)).epsilon(1e-13));
  CHECK(l2_norm(f) == doctest::Approx(std::sqrt(L / 2)).epsilon(1e-13));
  const double k = 2 * M_PI / L;
  CHECK(sobolev_norm(f, 2) == doctest::Approx(std::sqrt(L / 2) * (1 + k * k)).epsilon(1e-13));
}

TEST_CASE("H1 norm equals L2 plus gradient quadrature") {
  std::mt19937_64 rng(21);
  for (int dim = 1; dim <= 3; ++dim) {
    const double L = 3.0;
    const Grid g(dim, 16, L);
    const ScalarField f = test::random_trig(rng, dim, 5, L, 0.4, 1.0, 6).sample(g);
    const double lhs = std::pow(sobolev_norm(f, 1), 2);
    const double rhs = std::pow(l2_norm(f), 2) + std::pow(l2_norm(gradient(f)), 2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("Parseval for random fields") {
  std::mt19937_64 rng(2);
  for (int dim = 1; dim <= 3; ++dim) {
    const Grid g(dim, 16, 1.7);
    const ScalarField f = random_field(g, rng);
    CHECK(sobolev_norm(f, 0) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
  }
}

TEST_CASE("norm report entries are nonnegative and monotone in s") {
  std::mt19937_64 rng(4);
  const Grid g(2, 16, 2.0);
  const ScalarField f = random_field(g, rng);
  const NormReport r = norm_report(f);
  for (int s = 0; s < 3; ++s) CHECK(r.h_norms[static_cast<std::size_t>(s)] <= r.h_norms[static_cast<std::size_t>(s + 1)]);
  for (double x : r.seminorms) CHECK(x >= 0.0);
  CHECK(r.linf == doctest::Approx(f.max_abs()));
}

TEST_CASE("seminorm counts every ordered derivative tuple") {
  // u = sin(kx + ky) in 2D: |grad^2 u|^2 sums four equal second derivatives.
  const double L = 2 * M_PI;
  const Grid g(2, 16, L);
  const ScalarField f = ScalarField::sample(g, [](const Point& x) { return std::sin(x[0] + x[1]); });
  const double expect = std::sqrt(4.0 * L * L / 2.0);
  CHECK(seminorm(f, 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("weighted seminorm: unit and zero weights") {
  std::mt19937_64 rng(8);
  const Grid g(2, 16, 2.0);
  VectorField u(g);
  u[0] = test::random_trig(rng, 2, 4, 2.0, 0.0, 1.0).sample(g);
  u[1] = test::random_trig(rng, 2, 4, 2.0, 0.0, 1.0).sample(g);
  for (int k = 2; k <= 3; ++k) {
    CHECK(weighted_seminorm(ScalarField(g, 1.0), u, k) == doctest::Approx(seminorm(u, k)).epsilon(1e-10));
    CHECK(weighted_seminorm(ScalarField(g, 0.0), u, k) == 0.0);
  }
}

TEST_CASE("weighted seminorm against fine brute-force quadrature") {
  const double L = 8.0;
  const Grid g(1, 64, L);
  const double k = 2 * M_PI * 3 / L;
  auto w = [](double x) { return std::exp(-x * x); };
  const ScalarField wf = ScalarField::sample(g, [&](const Point& x) { return w(x[0]); });
  VectorField u(g);
  u[0] = ScalarField::sample(g, [k](const Point& x) { return std::sin(k * x[0]); });
  for (int order = 2; order <= 4; ++order) {
    const int nf = 4 * 64;
    const double h = L / nf;
    double sum = 0.0;
    for (int i = 0; i < nf; ++i) {
      const double x = -0.5 * L + i * h;
      const double dk = std::pow(k, order) * (order % 2 == 0 ? (order % 4 == 0 ? 1 : -1) * std::sin(k * x)
                                                             : (order % 4 == 1 ? 1 : -1) * std::cos(k * x));
      sum += h * std::pow(w(x) * dk, 2);
    }
    CHECK(weighted_seminorm(wf, u, order) == doctest::Approx(std::sqrt(sum)).epsilon(1e-10));
  }
}

TEST_CASE("interpolation and resampling are exact for band-limited fields") {
  std::mt19937_64 rng(13);
  const double L = 3.0;
  const auto p = test::random_trig(rng, 2, 3, L, 0.5, 1.0, 4);
  const Grid g(2, 16, L);
  const ScalarField f = p.sample(g);
  for (const Point& x : {Point{0.1, -0.7, 0}, Point{1.4, 0.3, 0}, Point{-1.5, -1.5, 0}}) {
    CHECK(interpolate(f, x) == doctest::Approx(p.value(x)).epsilon(1e-12));
  }
  const Grid fine(2, 32, L);
  CHECK(max_diff(resample(f, fine), p.sample(fine)) < 1e-12);
  CHECK(max_diff(resample(resample(f, fine), g), f) < 1e-12);
}

TEST_CASE("snapshot round trip is bit exact") {
  std::mt19937_64 rng(17);
  const Grid g(2, 8, 1.25);
  VectorField u(g);
  u[0] = random_field(g, rng);
  u[1] = random_field(g, rng);
  const Snapshot s = make_snapshot(u, 0.375);
  const auto bytes = encode_snapshot(s);
  CHECK(bytes.size() == kSnapshotHeaderBytes + 2 * 64 * 8);
  CHECK(std::memcmp(bytes.data(), "VNSF", 4) == 0);
  CHECK(bytes[4] == 1);  // version, little-endian
  CHECK(bytes[8] == 2);  // dim
  CHECK(bytes[12] == 8); // n
  const Snapshot back = decode_snapshot(bytes);
  CHECK(back.grid == g);
  CHECK(back.role == FieldRole::velocity);
  CHECK(back.time == 0.375);
  REQUIRE(back.components.size() == 2);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(back.components[static_cast<std::size_t>(c)][i] == u[c][i]);
  }
}

TEST_CASE("snapshot decoding rejects malformed input") {
  const Snapshot s = make_snapshot(ScalarField(Grid(1, 8, 1.0), 2.0), FieldRole::rho, 0.0);
  auto bytes = encode_snapshot(s);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS((void)decode_snapshot(bad), SnapshotError);
  auto cut = bytes;
  cut.pop_back();
  CHECK_THROWS_AS((void)decode_snapshot(cut), SnapshotError);
  auto ver = bytes;
  ver[4] = 9;
  CHECK_THROWS_AS((void)decode_snapshot(ver), SnapshotError);
}

TEST_CASE("snapshot files") {
  const auto dir = test::scratch_dir("snapshot");
  const Snapshot s = make_snapshot(ScalarField(Grid(1, 8, 1.0), 2.0), FieldRole::phi, 1.5);
  write_snapshot(dir / "f.vnsf", s);
  const Snapshot back = read_snapshot(dir / "f.vnsf");
  CHECK(back.role == FieldRole::phi);
  CHECK(back.components[0][3] == 2.0);
  CHECK_THROWS_AS((void)read_snapshot(dir / "missing.vnsf"), SnapshotError);
}
