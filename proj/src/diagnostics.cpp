#include "vns/diagnostics.hpp"

#include "vns/calculus.hpp"
#include "vns/norms.hpp"
#include "vns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vns {

namespace {

double sq(double x) { return x * x; }

// Weights of the derivative at times[i] of the Lagrange interpolant through
// a three-point stencil starting at *first.
std::vector<double> lagrange_derivative(const std::vector<double>& x, std::size_t first, std::size_t count, double at) {
  std::vector<double> w(count, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    double sum = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
      if (m == j) continue;
      double prod = 1.0 / (x[first + j] - x[first + m]);
      for (std::size_t l = 0; l < count; ++l) {
        if (l == j || l == m) continue;
        prod *= (at - x[first + l]) / (x[first + j] - x[first + l]);
      }
      sum += prod;
    }
    w[j] = sum;
  }
  return w;
}

// Cubic (or lower when short) Lagrange weights for value interpolation.
std::vector<double> lagrange_values(const std::vector<double>& x, double at, std::size_t* first) {
  const std::size_t n = x.size();
  std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin());
  j = j == 0 ? 0 : j - 1;
  const std::size_t width = std::min<std::size_t>(4, n);
  std::size_t f = j >= 1 ? j - 1 : 0;
  f = std::min(f, n - width);
  *first = f;
  std::vector<double> w(width);
  for (std::size_t a = 0; a < width; ++a) {
    double l = 1.0;
    for (std::size_t b = 0; b < width; ++b) {
      if (a != b) l *= (at - x[f + b]) / (x[f + a] - x[f + b]);
    }
    w[a] = l;
  }
  return w;
}

ScalarField density(const FluidParams& params, const ScalarField& vphi) {
  return safe_pow(vphi, 2.0 / (params.delta1 - 1.0));
}

bool has_vacuum(const ScalarField& rho, double vac_eps) { return rho.min() < vac_eps; }

}  // namespace

std::vector<double> difference_weights(const std::vector<double>& times, std::size_t i, std::size_t* first) {
  const std::size_t n = times.size();
  if (n < 2) {
    *first = i;
    return {};
  }
  if (n == 2) {
    *first = 0;
    const double h = times[1] - times[0];
    return {-1.0 / h, 1.0 / h};
  }
  const std::size_t f = i == 0 ? 0 : (i + 1 == n ? n - 3 : i - 1);
  *first = f;
  return lagrange_derivative(times, f, 3, times[i]);
}

ReformState time_derivative(const Trajectory& traj, std::size_t i) {
  const auto times = traj.times();
  std::size_t first = 0;
  const auto w = difference_weights(times, i, &first);
  ReformState d = zero_state(traj.states[i].grid(), times[i]);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const ReformState& s = traj.states[first + j];
    d.vphi.axpy(w[j], s.vphi);
    d.phi.axpy(w[j], s.phi);
    d.u.axpy(w[j], s.u);
  }
  return d;
}

double initial_level(const ReformState& s0) {
  return 1.0 + sobolev_norm(s0.vphi, 3) + sobolev_norm(s0.phi, 3) + sobolev_norm(s0.u, 3);
}

double horizon(double T, double c3, double m) { return std::min(T, std::pow(1.0 + c3, -4.0 * m - 4.0)); }

AprioriLedger ledger(const Trajectory& traj, const FluidParams& params, double calib_C, double T) {
  if (traj.states.empty()) throw std::invalid_argument("ledger needs a nonempty trajectory");
  if (!(calib_C > 0.0)) throw std::invalid_argument("calib_C must be positive");
  AprioriLedger led;
  led.calib_C = calib_C;
  led.m = params.m;
  led.T = T > 0.0 ? T : traj.back().time - traj.front().time;
  led.c0 = initial_level(traj.front());
  const double c = std::sqrt(calib_C) * led.c0;
  led.c = {c, c, c};
  const double c3 = led.c[2];
  led.T1 = std::min(led.T, std::pow(1.0 + c3, -2.0));
  led.T2 = std::min(led.T1, std::pow(1.0 + c3, -4.0 * params.m - 2.0));
  led.T3 = std::min(led.T2, std::pow(1.0 + c3, -4.0 * params.m - 4.0));
  led.T_star_star = horizon(led.T, c3, params.m);

  std::array<double, 3> sup_level{};
  double sup_ut = 0.0;
  double int_ut = 0.0;
  double prev_ut_d2 = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ReformState& s = traj.states[i];
    LedgerRow row;
    row.t = s.time;
    for (int k = 1; k <= 3; ++k) {
      const auto ks = static_cast<std::size_t>(k - 1);
      row.vphi_h[ks] = sobolev_norm(s.vphi, k);
      row.phi_h[ks] = sobolev_norm(s.phi, k);
      row.u_h[ks] = sobolev_norm(s.u, k);
      row.weighted[ks] = weighted_seminorm(s.vphi, s.u, k + 1);
    }
    if (traj.states.size() >= 2) {
      const ReformState d = time_derivative(traj, i);
      row.vphi_t_h2 = sobolev_norm(d.vphi, 2);
      row.phi_t_h2 = sobolev_norm(d.phi, 2);
      row.u_t_h1 = sobolev_norm(d.u, 1);
      row.u_t_d2 = seminorm(d.u, 2);
    }
    if (i == 0) {
      row.weighted_int = {0.0, 0.0, 0.0};
    } else {
      const LedgerRow& prev = led.rows.back();
      const double h = row.t - prev.t;
      for (std::size_t k = 0; k < 3; ++k) {
        row.weighted_int[k] = prev.weighted_int[k] + 0.5 * h * (sq(prev.weighted[k]) + sq(row.weighted[k]));
      }
      int_ut += 0.5 * h * (sq(prev_ut_d2) + sq(row.u_t_d2));
    }
    prev_ut_d2 = row.u_t_d2;
    for (std::size_t k = 0; k < 3; ++k) {
      sup_level[k] = std::max(sup_level[k], sq(row.vphi_h[k]) + sq(row.phi_h[k]) + sq(row.u_h[k]));
      row.level[k] = sup_level[k] + row.weighted_int[k];
      const double bound = sq(led.c[k]);
      led.max_ratio[k] = std::max(led.max_ratio[k], row.level[k] / bound);
      if (!led.crossing[k] && row.level[k] > bound) led.crossing[k] = row.t;
    }
    sup_ut = std::max(sup_ut, sq(row.u_t_h1) + sq(row.phi_t_h2) + sq(row.vphi_t_h2));
    row.ut_level = sup_ut + int_ut;
    if (!led.ut_crossing && row.ut_level > std::pow(c3, 4.0 * params.m + 4.0)) led.ut_crossing = row.t;
    row.coeff_min = bulk_coefficient(params, s.vphi).min();
    led.rows.push_back(row);
  }
  return led;
}

double support_extent(const ScalarField& rho) {
  const Grid& g = rho.grid();
  double ext = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] <= kSupportEps) continue;
    const auto x = g.point(i);
    for (int d = 0; d < g.dim(); ++d) ext = std::max(ext, std::abs(x[static_cast<std::size_t>(d)]));
  }
  return ext;
}

bool support_margin_ok(const ScalarField& rho, double margin_fraction) {
  const double L = rho.grid().box_length();
  return support_extent(rho) <= 0.5 * L - margin_fraction * L;
}

ValidityVerdict validity(const Trajectory& traj, const AprioriLedger& led, const FluidParams& params) {
  ValidityVerdict v;
  const bool vacuum_data = has_vacuum(density(params, traj.front().vphi), kVacuumEps);
  v.t_valid = traj.front().time;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::vector<std::string> reasons;
    const LedgerRow& row = led.rows[i];
    if (row.coeff_min < 0.5 * params.alpha) reasons.push_back("alpha + beta vphi^{2m} < alpha/2");
    for (std::size_t k = 0; k < 3; ++k) {
      if (row.level[k] > sq(led.c[k])) reasons.push_back("ledger level " + std::to_string(k + 1) + " above c^2");
    }
    if (vacuum_data && !support_margin_ok(density(params, traj.states[i].vphi))) {
      reasons.push_back("support within L/8 of the boundary");
    }
    if (!reasons.empty()) {
      v.reasons = std::move(reasons);
      v.whole_window = false;
      v.valid_at_start = i > 0;
      return v;
    }
    v.t_valid = traj.states[i].time;
  }
  return v;
}

PrimitiveState reconstruct_primitive(const ReformState& s, const FluidParams& params) {
  PrimitiveState p;
  p.rho = density(params, s.vphi);
  p.u = s.u;
  p.time = s.time;
  const ScalarField alt = safe_pow(s.phi, 2.0 / (params.gamma - 1.0));
  for (std::size_t i = 0; i < alt.size(); ++i) p.gap = std::max(p.gap, std::abs(p.rho[i] - alt[i]));
  return p;
}

VacuumResidual vacuum_residual(const Trajectory& traj, const FluidParams& params, double vac_eps) {
  VacuumResidual r;
  if (traj.states.size() < 2) return r;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ReformState& s = traj.states[i];
    const ScalarField rho = density(params, s.vphi);
    double local = 0.0;
    bool any = false;
    for (std::size_t p = 0; p < rho.size(); ++p) any = any || rho[p] < vac_eps;
    if (any) {
      r.no_vacuum = false;
      const ReformState d = time_derivative(traj, i);
      const auto J = jacobian(s.u);
      const int dim = s.u.dim();
      for (std::size_t p = 0; p < rho.size(); ++p) {
        if (rho[p] >= vac_eps) continue;
        double norm2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          double v = d.u[a][p];
          for (int b = 0; b < dim; ++b) v += s.u[b][p] * J[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][p];
          norm2 += v * v;
        }
        local = std::max(local, std::sqrt(norm2));
      }
    }
    r.per_sample.push_back(local);
    r.max = std::max(r.max, local);
  }
  return r;
}

ConservationReport conservation(const Trajectory& traj, const FluidParams& params) {
  ConservationReport c;
  double scale = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ReformState& s = traj.states[i];
    const ScalarField rho = density(params, s.vphi);
    c.times.push_back(s.time);
    c.mass.push_back(integral(rho));
    std::vector<double> mom;
    for (int d = 0; d < s.u.dim(); ++d) mom.push_back(integral(hadamard(rho, s.u[d])));
    c.momentum.push_back(mom);
    if (i == 0) {
      ScalarField speed(rho.grid());
      for (std::size_t p = 0; p < rho.size(); ++p) {
        double v2 = 0.0;
        for (int d = 0; d < s.u.dim(); ++d) v2 += s.u[d][p] * s.u[d][p];
        speed[p] = rho[p] * std::sqrt(v2);
      }
      scale = integral(speed);
    }
  }
  const double m0 = c.mass.front();
  for (std::size_t i = 0; i < c.mass.size(); ++i) {
    const double dm = std::abs(c.mass[i] - m0);
    c.mass_drift = std::max(c.mass_drift, m0 > 0.0 ? dm / m0 : dm);
    double dp2 = 0.0;
    for (std::size_t d = 0; d < c.momentum[i].size(); ++d) dp2 += sq(c.momentum[i][d] - c.momentum.front()[d]);
    const double dp = std::sqrt(dp2);
    c.momentum_drift = std::max(c.momentum_drift, scale > 0.0 ? dp / scale : dp);
  }
  return c;
}

SpectralInterpolant::SpectralInterpolant(const ScalarField& f) : grid_(f.grid()) {
  const Spectral sp(grid_);
  const auto spec = sp.forward(f.values());
  const double n_total = static_cast<double>(grid_.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (std::abs(spec[i]) == 0.0) continue;
    bool nyquist = false;
    std::array<double, 3> k{};
    for (int d = 0; d < grid_.dim(); ++d) {
      k[static_cast<std::size_t>(d)] = sp.wavenumber(i, d);
      nyquist = nyquist || sp.is_nyquist(i, d);
    }
    const double w = sp.parseval_weight(i) / n_total;
    k_.push_back(k);
    re_.push_back(w * spec[i].real());
    im_.push_back(nyquist ? 0.0 : w * spec[i].imag());
  }
}

double SpectralInterpolant::operator()(const std::array<double, 3>& x) const {
  const double half = 0.5 * grid_.box_length();
  double acc = 0.0;
  for (std::size_t i = 0; i < k_.size(); ++i) {
    double phase = 0.0;
    for (int d = 0; d < grid_.dim(); ++d) {
      const auto sd = static_cast<std::size_t>(d);
      phase += k_[i][sd] * (x[sd] + half);
    }
    acc += re_[i] * std::cos(phase) - im_[i] * std::sin(phase);
  }
  return acc;
}

CharacteristicsReport characteristics_check(const Trajectory& traj, const FluidParams& params,
                                            std::size_t n_particles, double vac_eps) {
  CharacteristicsReport rep;
  if (traj.states.size() < 2 || n_particles == 0) return rep;
  const Grid& g = traj.front().grid();
  const int dim = g.dim();
  const auto times = traj.times();
  std::vector<std::vector<SpectralInterpolant>> vel(traj.states.size());
  std::vector<SpectralInterpolant> div;
  std::vector<SpectralInterpolant> rho;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ReformState& s = traj.states[i];
    for (int d = 0; d < dim; ++d) vel[i].emplace_back(s.u[d]);
    div.emplace_back(divergence(s.u));
    rho.emplace_back(density(params, s.vphi));
  }
  const double limit = 0.375 * g.box_length();
  const auto inside = [&](const std::array<double, 3>& x) {
    for (int d = 0; d < dim; ++d) {
      if (std::abs(x[static_cast<std::size_t>(d)]) > limit) return false;
    }
    return true;
  };
  // Velocity and divergence at (t, x) with cubic interpolation in time.
  const auto field = [&](double t, const std::array<double, 3>& x, std::array<double, 4>& out) {
    std::size_t first = 0;
    const auto w = lagrange_values(times, t, &first);
    out = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (int d = 0; d < dim; ++d) out[static_cast<std::size_t>(d)] += w[j] * vel[first + j][static_cast<std::size_t>(d)](x);
      out[3] += w[j] * div[first + j](x);
    }
  };

  const ScalarField rho0 = density(params, traj.front().vphi);
  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < rho0.size(); ++i) {
    if (rho0[i] > vac_eps && inside(g.point(i))) seeds.push_back(i);
  }
  const std::size_t stride = std::max<std::size_t>(1, seeds.size() / n_particles);
  constexpr int kSubsteps = 2;
  for (std::size_t s = 0; s < seeds.size() && rep.traced + rep.dropped < n_particles; s += stride) {
    std::array<double, 3> x = g.point(seeds[s]);
    const double r0 = rho0[seeds[s]];
    double integral_div = 0.0;
    double worst = 0.0;
    bool dropped = false;
    for (std::size_t i = 0; i + 1 < times.size() && !dropped; ++i) {
      const double h = (times[i + 1] - times[i]) / kSubsteps;
      for (int sub = 0; sub < kSubsteps; ++sub) {
        const double t = times[i] + sub * h;
        std::array<double, 4> k1{}, k2{}, k3{}, k4{};
        const auto shifted = [&](const std::array<double, 4>& k, double a) {
          std::array<double, 3> y = x;
          for (int d = 0; d < dim; ++d) y[static_cast<std::size_t>(d)] += a * k[static_cast<std::size_t>(d)];
          return y;
        };
        field(t, x, k1);
        field(t + 0.5 * h, shifted(k1, 0.5 * h), k2);
        field(t + 0.5 * h, shifted(k2, 0.5 * h), k3);
        field(t + h, shifted(k3, h), k4);
        for (int d = 0; d < dim; ++d) {
          const auto sd = static_cast<std::size_t>(d);
          x[sd] += h / 6.0 * (k1[sd] + 2.0 * k2[sd] + 2.0 * k3[sd] + k4[sd]);
        }
        integral_div += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
      }
      if (!inside(x)) {
        dropped = true;
        break;
      }
      const double predicted = r0 * std::exp(-integral_div);
      const double measured = rho[i + 1](x);
      worst = std::max(worst, std::abs(measured - predicted) / predicted);
    }
    if (dropped) {
      ++rep.dropped;
    } else {
      ++rep.traced;
      rep.max_rel_error = std::max(rep.max_rel_error, worst);
    }
  }
  return rep;
}

double NonlinearResidual::reform() const { return std::max({vphi, phi, u}); }

double NonlinearResidual::primitive() const { return std::max(rho, momentum); }

VectorField stress_divergence(const FluidParams& params, const ScalarField& rho, const VectorField& u,
                              Dealias dealias) {
  const int dim = u.dim();
  const ScalarField mu = safe_pow(rho, params.delta1) * params.alpha;
  const ScalarField lambda = safe_pow(rho, params.delta2) * params.beta;
  const auto J = jacobian(u, dealias);
  const ScalarField lam_div = hadamard(lambda, divergence(u, dealias));
  VectorField out(u.grid());
  for (int i = 0; i < dim; ++i) {
    const auto si = static_cast<std::size_t>(i);
    ScalarField acc = derivative(lam_div, [&] {
      MultiIndex m{0, 0, 0};
      m[si] = 1;
      return m;
    }(), dealias);
    for (int j = 0; j < dim; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      MultiIndex m{0, 0, 0};
      m[sj] = 1;
      acc += derivative(hadamard(mu, J[si][sj] + J[sj][si]), m, dealias);
    }
    out[i] = std::move(acc);
  }
  return out;
}

NonlinearResidual nonlinear_residual(const Trajectory& traj, const FluidParams& params,
                                     const ForcingSource* reform_forcing,
                                     const PrimitiveForcingSource* primitive_forcing) {
  NonlinearResidual r;
  const std::size_t n = traj.states.size();
  if (n < 2) return r;
  const auto times = traj.times();
  const std::size_t lo = n >= 3 ? 1 : 0;
  const std::size_t hi = n >= 3 ? n - 1 : n;
  const double g1 = 0.5 * (params.delta1 - 1.0);
  const double g2 = 0.5 * (params.gamma - 1.0);
  for (std::size_t i = lo; i < hi; ++i) {
    const ReformState& s = traj.states[i];
    const ReformState d = time_derivative(traj, i);
    const ScalarField divu = divergence(s.u);

    ScalarField rv = d.vphi + advect(s.u, s.vphi);
    rv.axpy(g1, hadamard(s.vphi, divu));
    ScalarField rp = d.phi + advect(s.u, s.phi);
    rp.axpy(g2, hadamard(s.phi, divu));
    auto conv = convection_apply(params, s, s, Dealias::none);
    VectorField ru = conv.second + viscous_apply(params, s.vphi, s.u, 0.0, Dealias::none);
    ru -= source_apply(params, s, s.vphi, Dealias::none);
    ru *= 1.0 / params.a1;
    ru += d.u;
    if (reform_forcing) {
      const ReformState f = reform_forcing->at(s.time);
      rv -= f.vphi;
      rp -= f.phi;
      ru -= f.u;
    }
    r.vphi = std::max(r.vphi, l2_norm(rv));
    r.phi = std::max(r.phi, l2_norm(rp));
    r.u = std::max(r.u, l2_norm(ru));

    // Primitive form with rho = vphi^{2/(delta1-1)}, m = rho u.
    std::size_t first = 0;
    const auto w = difference_weights(times, i, &first);
    ScalarField rho_t(s.grid());
    VectorField m_t(s.grid());
    for (std::size_t j = 0; j < w.size(); ++j) {
      const ReformState& sj = traj.states[first + j];
      const ScalarField rj = density(params, sj.vphi);
      rho_t.axpy(w[j], rj);
      m_t.axpy(w[j], scale(rj, sj.u));
    }
    const ScalarField rho = density(params, s.vphi);
    const VectorField mom = scale(rho, s.u);
    ScalarField rr = rho_t + divergence(mom);
    const ScalarField pressure = safe_pow(rho, params.gamma) * params.A;
    const VectorField grad_p = gradient(pressure);
    const VectorField divT = stress_divergence(params, rho, s.u);
    VectorField rm = m_t;
    for (int a = 0; a < s.u.dim(); ++a) {
      VectorField flux(s.grid());
      for (int b = 0; b < s.u.dim(); ++b) flux[b] = hadamard(mom[a], s.u[b]);
      rm[a] += divergence(flux);
      rm[a] += grad_p[a];
      rm[a] -= divT[a];
    }
    if (primitive_forcing) {
      const auto [fr, fm] = primitive_forcing->at(s.time);
      rr -= fr;
      rm -= fm;
    }
    r.rho = std::max(r.rho, l2_norm(rr));
    r.momentum = std::max(r.momentum, l2_norm(rm));
  }
  return r;
}

}  // namespace vns
