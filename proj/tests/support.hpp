#pragma once

// Shared helpers for the test executables: analytic trigonometric fields,
// random admissible parameters, scratch directories.

#include "vns/grid.hpp"
#include "vns/params.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vns::test {

using Point = std::array<double, 3>;

/// c + sum_j a_j cos(k_j . x + theta_j) with closed-form derivatives.
struct TrigPoly {
  struct Term {
    double a;
    Point k;
    double theta;
  };
  double c = 0.0;
  std::vector<Term> terms;

  double arg(const Term& t, const Point& x) const { return t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2] + t.theta; }

  double value(const Point& x) const {
    double s = c;
    for (const auto& t : terms) s += t.a * std::cos(arg(t, x));
    return s;
  }
  double d(int i, const Point& x) const {
    double s = 0.0;
    for (const auto& t : terms) s -= t.a * t.k[i] * std::sin(arg(t, x));
    return s;
  }
  double dd(int i, int j, const Point& x) const {
    double s = 0.0;
    for (const auto& t : terms) s -= t.a * t.k[i] * t.k[j] * std::cos(arg(t, x));
    return s;
  }
  ScalarField sample(const Grid& g) const {
    return ScalarField::sample(g, [this](const Point& x) { return value(x); });
  }
};

/// Random trigonometric polynomial with integer modes |k_i| <= kmax on a box of length L.
inline TrigPoly random_trig(std::mt19937_64& rng, int dim, int kmax, double L, double mean, double amp, int count = 3) {
  std::uniform_int_distribution<int> mode(-kmax, kmax);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  TrigPoly p;
  p.c = mean;
  for (int j = 0; j < count; ++j) {
    TrigPoly::Term t{amp * unit(rng) / count, {0, 0, 0}, M_PI * unit(rng)};
    for (int i = 0; i < dim; ++i) t.k[static_cast<std::size_t>(i)] = 2.0 * M_PI * mode(rng) / L;
    p.terms.push_back(t);
  }
  return p;
}

/// Random parameter tuple inside the admissible region.
inline RawParams random_admissible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RawParams p;
  p.A = 0.2 + 2.0 * u01(rng);
  p.delta1 = 1.05 + 1.9 * u01(rng);
  p.gamma = 1.05 + 1.9 * u01(rng);
  const double lower = std::max(p.delta1 + 0.05, 2.5 * p.delta1 - 1.5);
  p.delta2 = lower + 1.5 * u01(rng);
  p.alpha = 0.05 + 1.5 * u01(rng);
  p.beta = p.alpha * (2.0 * u01(rng) - 1.0);
  return p;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vns_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace vns::test
