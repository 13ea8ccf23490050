#include "vns/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace vns {

double safe_pow(double x, double p) { return x > 1e-300 ? std::exp(p * std::log(x)) : 0.0; }

ScalarField safe_pow(const ScalarField& f, double p) {
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = safe_pow(f[i], p);
  return out;
}

ReformState state_from_density(const FluidParams& params, const ScalarField& rho, const VectorField& u, double time) {
  require_same_grid(rho.grid(), u.grid());
  return {safe_pow(rho, 0.5 * (params.delta1 - 1.0)), safe_pow(rho, 0.5 * (params.gamma - 1.0)), u, time};
}

ReformState zero_state(const Grid& grid, double time) {
  return {ScalarField(grid), ScalarField(grid), VectorField(grid), time};
}

ScalarField bulk_coefficient(const FluidParams& params, const ScalarField& vphi) {
  ScalarField out(vphi.grid());
  for (std::size_t i = 0; i < vphi.size(); ++i) out[i] = params.alpha + params.beta * safe_pow(vphi[i], 2.0 * params.m);
  return out;
}

std::pair<ScalarField, VectorField> convection_apply(const FluidParams& params, const ReformState& V,
                                                     const ReformState& W, Dealias dealias) {
  require_same_grid(V.grid(), W.grid());
  const double g = 0.5 * (params.gamma - 1.0);
  const VectorField& v = V.u;
  ScalarField first = advect(v, W.phi, dealias);
  first.axpy(g, hadamard(V.phi, divergence(W.u, dealias)));

  const VectorField grad_phi = gradient(W.phi, dealias);
  VectorField second(W.grid());
  for (int i = 0; i < W.u.dim(); ++i) {
    second[i] = advect(v, W.u[i], dealias) * params.a1;
    second[i].axpy(g, hadamard(V.phi, grad_phi[i]));
  }
  return {std::move(first), std::move(second)};
}

VectorField viscous_apply(const FluidParams& params, const ScalarField& vphi, const VectorField& u, double eta,
                          Dealias dealias) {
  require_same_grid(vphi.grid(), u.grid());
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  const VectorField lap = laplacian(u, dealias);
  const VectorField gd = grad_div(u, dealias);
  VectorField out(u.grid());
  for (std::size_t p = 0; p < vphi.size(); ++p) {
    const double w = vphi[p] * vphi[p] + eta * eta;
    const double bulk = params.alpha + params.beta * safe_pow(vphi[p], 2.0 * params.m);
    for (int i = 0; i < u.dim(); ++i) out[i][p] = -params.a1 * w * (params.alpha * lap[i][p] + bulk * gd[i][p]);
  }
  return out;
}

VectorField source_apply(const FluidParams& params, const ReformState& V, const ScalarField& vphi, Dealias dealias) {
  require_same_grid(V.grid(), vphi.grid());
  const int dim = V.u.dim();
  const double c1 = params.a1 * params.alpha * params.delta1 / (params.delta1 - 1.0);
  const double c2 = params.a1 * params.beta * params.delta2 / (params.delta2 - 1.0);
  const VectorField g1 = gradient(hadamard(vphi, vphi), dealias);
  const VectorField g2 = gradient(safe_pow(vphi, 2.0 * params.m + 2.0), dealias);
  const auto J = jacobian(V.u, dealias);
  VectorField out(V.grid());
  for (std::size_t p = 0; p < vphi.size(); ++p) {
    double div = 0.0;
    for (int j = 0; j < dim; ++j) div += J[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)][p];
    for (int i = 0; i < dim; ++i) {
      double q1 = 0.0;
      for (int j = 0; j < dim; ++j) {
        const auto si = static_cast<std::size_t>(i);
        const auto sj = static_cast<std::size_t>(j);
        q1 += (J[si][sj][p] + J[sj][si][p]) * g1[j][p];
      }
      out[i][p] = c1 * q1 + c2 * div * g2[i][p];
    }
  }
  return out;
}

double exponent_identity_gap(const FluidParams& params, const ScalarField& vphi) {
  const double direct = 2.0 * (params.delta2 - 1.0) / (params.delta1 - 1.0);
  const double via_m = 2.0 * params.m + 2.0;
  double gap = 0.0;
  for (double x : vphi.values()) gap = std::max(gap, std::abs(safe_pow(x, direct) - safe_pow(x, via_m)));
  return gap;
}

double quadratic_form(const FluidParams& params, double vphi_2m, const std::array<double, 3>& xi,
                      const std::array<double, 3>& zeta) {
  const double diag = 2.0 * params.a1 * params.alpha + params.a1 * params.beta * vphi_2m;
  const double cross_axis = params.a1 * params.alpha;
  const double mixed = params.a1 * params.alpha + params.a1 * params.beta * vphi_2m;
  double sum = 0.0;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double a = 0.0;
          if (p == q && i == j) a = (p == i) ? diag : cross_axis;
          else if (p == i && q == j) a = mixed;
          if (a == 0.0) continue;
          sum += a * xi[static_cast<std::size_t>(p)] * xi[static_cast<std::size_t>(q)] *
                 zeta[static_cast<std::size_t>(i)] * zeta[static_cast<std::size_t>(j)];
        }
      }
    }
  }
  return sum;
}

EllipticityReport ellipticity_check(const FluidParams& params, const ScalarField& vphi, std::size_t samples,
                                    std::uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("ellipticity_check needs at least 1000 samples");
  EllipticityReport r;
  r.samples = samples;
  r.seed = seed;
  const ScalarField coeff = bulk_coefficient(params, vphi);
  r.coeff_min = coeff.min();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cell(0, vphi.size() - 1);
  const auto unit_vector = [&] {
    std::array<double, 3> v{};
    double len = 0.0;
    while (len < 1e-8) {
      for (auto& c : v) c = normal(rng);
      len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    for (auto& c : v) c /= len;
    return v;
  };
  r.min_ratio = std::numeric_limits<double>::infinity();
  const double sigma = params.a1 * params.alpha;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto xi = unit_vector();
    const auto zeta = unit_vector();
    const double v2m = safe_pow(vphi[cell(rng)], 2.0 * params.m);
    r.min_ratio = std::min(r.min_ratio, quadratic_form(params, v2m, xi, zeta) / sigma);
  }
  r.pass = r.min_ratio >= 1.0 - 1e-9 && r.coeff_min > 0.0;
  return r;
}

}  // namespace vns
