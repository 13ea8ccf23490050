#include "vns/linearized.hpp"

#include "vns/calculus.hpp"
#include "vns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vns {

namespace {

// IMEX-SSP3(4,3,3) of Pareschi and Russo.
constexpr double kG = 0.24169426078821;
constexpr double kB = 0.06042356519705;
constexpr double kE = 0.12915286960590;

ReformState combine(const std::vector<double>& w, const std::vector<const ReformState*>& s) {
  ReformState out = zero_state(s.front()->grid());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.vphi.axpy(w[i], s[i]->vphi);
    out.phi.axpy(w[i], s[i]->phi);
    out.u.axpy(w[i], s[i]->u);
  }
  return out;
}

std::vector<double> pack(const VectorField& u) {
  std::vector<double> x;
  x.reserve(u.grid().size() * static_cast<std::size_t>(u.dim()));
  for (int d = 0; d < u.dim(); ++d) x.insert(x.end(), u[d].values().begin(), u[d].values().end());
  return x;
}

VectorField unpack(const Grid& g, const std::vector<double>& x) {
  VectorField u(g);
  const std::size_t n = g.size();
  for (int d = 0; d < g.dim(); ++d) {
    const auto off = static_cast<std::ptrdiff_t>(static_cast<std::size_t>(d) * n);
    u[d] = ScalarField(g, std::vector<double>(x.begin() + off, x.begin() + off + static_cast<std::ptrdiff_t>(n)));
  }
  return u;
}

std::size_t clip_negative(ScalarField& f, double* clipped_power_sum = nullptr, double power = 1.0) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0.0) {
      if (f[i] < -kClipTol) ++count;
      if (clipped_power_sum) *clipped_power_sum += std::pow(-f[i], power);
      f[i] = 0.0;
    }
  }
  return count;
}

// Solves (I - h g L) x = rhs with L the viscous rate at vphi, right
// preconditioned by the constant-coefficient operator at the maximal
// coefficients.
struct StageSolver {
  const FluidParams& p;
  const ScalarField& vphi;
  double eta;
  double hg;

  std::size_t solve(VectorField& x, const VectorField& rhs, const GmresOptions& opt) const {
    const Grid& g = rhs.grid();
    double a_bar = 0.0;
    double c_bar = 0.0;
    for (std::size_t i = 0; i < vphi.size(); ++i) {
      const double w = vphi[i] * vphi[i] + eta * eta;
      a_bar = std::max(a_bar, w * p.alpha);
      c_bar = std::max(c_bar, w * (p.alpha + p.beta * safe_pow(vphi[i], 2.0 * p.m)));
    }
    if (a_bar == 0.0 && c_bar == 0.0) {
      x = rhs;
      return 0;
    }
    const Spectral sp(g);
    const int dim = g.dim();
    const LinearMap A = [&](const std::vector<double>& in, std::vector<double>& out) {
      const VectorField u = unpack(g, in);
      VectorField y = u;
      y.axpy(-hg, viscous_rate(p, vphi, u, eta));
      out = pack(y);
    };
    const LinearMap M = [&](const std::vector<double>& in, std::vector<double>& out) {
      const std::size_t n = g.size();
      std::vector<std::vector<Complex>> spec;
      for (int d = 0; d < dim; ++d) {
        spec.push_back(sp.forward(std::span<const double>(in.data() + static_cast<std::size_t>(d) * n, n)));
      }
      for (std::size_t k = 0; k < sp.spectrum_size(); ++k) {
        if (!sp.in_two_thirds_band(k)) continue;
        const double k2 = sp.wavenumber_sq(k);
        const double a = 1.0 + hg * a_bar * k2;
        const double b = hg * c_bar;
        Complex kdotu = 0.0;
        for (int d = 0; d < dim; ++d) kdotu += sp.wavenumber(k, d) * spec[static_cast<std::size_t>(d)][k];
        const Complex corr = b * kdotu / (a + b * k2);
        for (int d = 0; d < dim; ++d) {
          auto& c = spec[static_cast<std::size_t>(d)][k];
          c = (c - corr * sp.wavenumber(k, d)) / a;
        }
      }
      out.resize(in.size());
      for (int d = 0; d < dim; ++d) {
        const auto v = sp.inverse(spec[static_cast<std::size_t>(d)]);
        std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(d) * n));
      }
    };
    const std::vector<double> b = pack(rhs);
    std::vector<double> sol = b;
    const GmresResult res = gmres(A, M, b, sol, opt);
    if (!res.converged) {
      throw std::runtime_error("implicit viscous solve did not converge (relative residual " +
                               std::to_string(res.residual) + ")");
    }
    x = unpack(g, sol);
    return res.iterations;
  }
};

}  // namespace

ReformState ConstantCoefficients::at(double) const { return V_; }

TrajectoryCoefficients::TrajectoryCoefficients(std::shared_ptr<const Trajectory> traj) : traj_(std::move(traj)) {
  if (!traj_ || traj_->states.empty()) throw std::invalid_argument("empty coefficient trajectory");
}

ReformState TrajectoryCoefficients::at(double t) const {
  const auto& s = traj_->states;
  const std::size_t n = s.size();
  // Index of the last sample at or before t.
  std::size_t j = 0;
  {
    std::size_t lo = 0;
    std::size_t hi = n;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (s[mid].time <= t) lo = mid;
      else hi = mid;
    }
    j = lo;
  }
  if (s[j].time == t) return s[j];
  if (n == 1) return s[0];
  const std::size_t width = std::min<std::size_t>(4, n);
  std::size_t first = j >= 1 ? j - 1 : 0;
  first = std::min(first, n - width);
  std::vector<double> w(width);
  std::vector<const ReformState*> pts(width);
  for (std::size_t a = 0; a < width; ++a) {
    double l = 1.0;
    for (std::size_t b = 0; b < width; ++b) {
      if (a == b) continue;
      l *= (t - s[first + b].time) / (s[first + a].time - s[first + b].time);
    }
    w[a] = l;
    pts[a] = &s[first + a];
  }
  ReformState out = combine(w, pts);
  out.time = t;
  return out;
}

FrozenCoefficients freeze(const ReformState& V, double eta, double T_win) {
  return {std::make_shared<ConstantCoefficients>(V), nullptr, eta, T_win};
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.time);
  return t;
}

StageCoefficients stage_coefficients(const FrozenCoefficients& coeffs, double t, double dt) {
  StageCoefficients sc;
  sc.t = t;
  sc.dt = dt;
  const std::array<double, 3> c{0.0, 1.0, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    sc.V[i] = coeffs.source->at(t + c[i] * dt);
    if (coeffs.forcing) sc.forcing[i] = coeffs.forcing->at(t + c[i] * dt);
  }
  return sc;
}

ScalarField transport_rhs(const FluidParams& params, const ScalarField& vphi, const ReformState& V,
                          const ReformState* forcing) {
  ScalarField r = advect(V.u, vphi, Dealias::two_thirds) * -1.0;
  r.axpy(-0.5 * (params.delta1 - 1.0), hadamard(V.vphi, divergence(V.u, Dealias::two_thirds)));
  if (forcing) r += forcing->vphi;
  return r;
}

TransportStages transport_step(const FluidParams& params, const ScalarField& vphi, const StageCoefficients& sc) {
  const double h = sc.dt;
  const auto f = [&](const ScalarField& y, std::size_t i) {
    return transport_rhs(params, y, sc.V[i], sc.forcing[i] ? &*sc.forcing[i] : nullptr);
  };
  TransportStages out;
  out.stage[0] = vphi;
  const ScalarField F2 = f(vphi, 0);
  out.stage[1] = vphi;
  out.stage[1].axpy(h, F2);
  const ScalarField F3 = f(out.stage[1], 1);
  out.stage[2] = vphi;
  out.stage[2].axpy(0.25 * h, F2);
  out.stage[2].axpy(0.25 * h, F3);
  const ScalarField F4 = f(out.stage[2], 2);
  out.next = vphi;
  out.next.axpy(h / 6.0, F2);
  out.next.axpy(h / 6.0, F3);
  out.next.axpy(2.0 * h / 3.0, F4);
  double clipped_rho = 0.0;
  const double rho_power = 2.0 / (params.delta1 - 1.0);
  out.clipped = clip_negative(out.next, &clipped_rho, rho_power);
  if (clipped_rho > 0.0) {
    double total = 0.0;
    for (double x : out.next.values()) total += safe_pow(x, rho_power);
    out.clipped_mass = total > 0.0 ? clipped_rho / total : clipped_rho;
  }
  return out;
}

TransportStages transport_step(const FluidParams& params, const ScalarField& vphi, const FrozenCoefficients& coeffs,
                               double t, double dt) {
  return transport_step(params, vphi, stage_coefficients(coeffs, t, dt));
}

VectorField viscous_rate(const FluidParams& params, const ScalarField& vphi, const VectorField& u, double eta) {
  const VectorField lap = laplacian(u, Dealias::two_thirds);
  const VectorField gd = grad_div(u, Dealias::two_thirds);
  VectorField out(u.grid());
  for (std::size_t p = 0; p < vphi.size(); ++p) {
    const double w = vphi[p] * vphi[p] + eta * eta;
    const double bulk = params.alpha + params.beta * safe_pow(vphi[p], 2.0 * params.m);
    for (int i = 0; i < u.dim(); ++i) out[i][p] = w * (params.alpha * lap[i][p] + bulk * gd[i][p]);
  }
  return out;
}

MomentumResult momentum_step(const FluidParams& params, const ScalarField& phi, const VectorField& u,
                             const StageCoefficients& sc, const TransportStages& vphi, double eta,
                             const GmresOptions& gmres_opt) {
  const double h = sc.dt;
  const double inv_a1 = 1.0 / params.a1;
  MomentumResult out;

  // Explicit rates of (phi, u) at explicit stage i (0: t, 1: t+h, 2: t+h/2).
  const auto explicit_rate = [&](const ScalarField& ph, const VectorField& uu, std::size_t i) {
    const ReformState W{vphi.stage[i], ph, uu, sc.t};
    auto [cphi, cu] = convection_apply(params, sc.V[i], W);
    ScalarField rphi = cphi * -1.0;
    VectorField ru = cu * -inv_a1;
    ru.axpy(inv_a1, source_apply(params, sc.V[i], vphi.stage[i]));
    if (sc.forcing[i]) {
      rphi += sc.forcing[i]->phi;
      ru += sc.forcing[i]->u;
    }
    return std::pair<ScalarField, VectorField>{std::move(rphi), std::move(ru)};
  };
  const auto implicit_stage = [&](const VectorField& rhs, const ScalarField& vp, VectorField& x) {
    const StageSolver solver{params, vp, eta, h * kG};
    out.gmres_iterations += solver.solve(x, rhs, gmres_opt);
    return viscous_rate(params, vp, x, eta);
  };

  // Stage 1 (implicit only, vphi at t).
  VectorField u1;
  const VectorField I1 = implicit_stage(u, vphi.stage[0], u1);

  // Stage 2.
  VectorField rhs = u;
  rhs.axpy(-h * kG, I1);
  VectorField u2;
  const VectorField I2 = implicit_stage(rhs, vphi.stage[0], u2);
  const auto [Ephi2, Eu2] = explicit_rate(phi, u2, 0);

  // Stage 3.
  ScalarField phi3 = phi;
  phi3.axpy(h, Ephi2);
  rhs = u;
  rhs.axpy(h, Eu2);
  rhs.axpy(h * (1.0 - kG), I2);
  VectorField u3;
  const VectorField I3 = implicit_stage(rhs, vphi.stage[1], u3);
  const auto [Ephi3, Eu3] = explicit_rate(phi3, u3, 1);

  // Stage 4.
  ScalarField phi4 = phi;
  phi4.axpy(0.25 * h, Ephi2);
  phi4.axpy(0.25 * h, Ephi3);
  rhs = u;
  rhs.axpy(0.25 * h, Eu2);
  rhs.axpy(0.25 * h, Eu3);
  rhs.axpy(h * kB, I1);
  rhs.axpy(h * kE, I2);
  rhs.axpy(h * (0.5 - kB - kE - kG), I3);
  VectorField u4;
  const VectorField I4 = implicit_stage(rhs, vphi.stage[2], u4);
  const auto [Ephi4, Eu4] = explicit_rate(phi4, u4, 2);

  out.phi = phi;
  out.phi.axpy(h / 6.0, Ephi2);
  out.phi.axpy(h / 6.0, Ephi3);
  out.phi.axpy(2.0 * h / 3.0, Ephi4);
  out.u = u;
  out.u.axpy(h / 6.0, Eu2);
  out.u.axpy(h / 6.0, I2);
  out.u.axpy(h / 6.0, Eu3);
  out.u.axpy(h / 6.0, I3);
  out.u.axpy(2.0 * h / 3.0, Eu4);
  out.u.axpy(2.0 * h / 3.0, I4);
  out.clipped = clip_negative(out.phi);
  return out;
}

double cfl_number(const FluidParams& params, const ReformState& V, double dt) {
  const Grid& g = V.grid();
  const double speed = std::sqrt(static_cast<double>(g.dim())) *
                       (V.u.max_norm() + params.sound_speed_factor() * std::max(0.0, V.phi.max()));
  return dt * speed / g.spacing();
}

double cfl_step(const FluidParams& params, const ReformState& V, double cfl_safety) {
  const Grid& g = V.grid();
  const double speed = std::sqrt(static_cast<double>(g.dim())) *
                       (V.u.max_norm() + params.sound_speed_factor() * std::max(0.0, V.phi.max()));
  return cfl_safety * g.spacing() / (speed + 1e-300);
}

Trajectory solve_linearized(const FluidParams& params, const ReformState& init, const FrozenCoefficients& coeffs,
                            const SolverSettings& settings) {
  if (!(coeffs.T_win > 0.0)) throw std::invalid_argument("time window must be positive");
  if (!(coeffs.eta >= 0.0 && coeffs.eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!coeffs.source) throw std::invalid_argument("missing coefficient source");
  if (settings.dt_fixed && !(*settings.dt_fixed > 0.0)) throw std::invalid_argument("dt must be positive");

  Trajectory traj;
  ReformState state = init;
  const double t0 = init.time;
  const double t_end = t0 + coeffs.T_win;
  traj.states.push_back(state);
  std::size_t next_sample = 1;
  const auto sample_time = [&](std::size_t k) {
    if (settings.cadence <= 0.0) return t_end;
    return std::min(t_end, t0 + static_cast<double>(k) * settings.cadence);
  };

  double t = t0;
  while (t < t_end) {
    const ReformState V0 = coeffs.source->at(t);
    double dt = settings.dt_fixed ? *settings.dt_fixed : cfl_step(params, V0, settings.cfl_safety);
    double target = sample_time(next_sample);
    bool lands = false;
    if (t + dt >= target - 1e-9 * dt) {
      dt = target - t;
      lands = true;
    }
    StepRecord rec;
    rec.t = t;
    rec.dt = dt;
    try {
      const StageCoefficients sc = stage_coefficients(coeffs, t, dt);
      for (const auto& V : sc.V) rec.cfl = std::max(rec.cfl, cfl_number(params, V, dt));
      if (rec.cfl > settings.cfl_limit) {
        throw CflError("linearized step", t,
                       "CFL number " + std::to_string(rec.cfl) + " exceeds " + std::to_string(settings.cfl_limit));
      }
      TransportStages ts = transport_step(params, state.vphi, sc);
      MomentumResult mr = momentum_step(params, state.phi, state.u, sc, ts, coeffs.eta, settings.gmres);
      rec.clipped_vphi = ts.clipped;
      rec.clipped_mass = ts.clipped_mass;
      rec.clipped_phi = mr.clipped;
      rec.gmres_iterations = mr.gmres_iterations;
      state.vphi = std::move(ts.next);
      state.phi = std::move(mr.phi);
      state.u = std::move(mr.u);
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("linearized step", t, e.what());
    }
    t = lands ? target : t + dt;
    state.time = t;
    rec.coeff_min = bulk_coefficient(params, state.vphi).min();
    if (rec.coeff_min < 0.5 * params.alpha) {
      if (settings.validity == ValidityPolicy::abort) {
        throw ValidityError("linearized step", t,
                            "alpha + beta vphi^{2m} fell to " + std::to_string(rec.coeff_min) + " < alpha/2");
      }
      if (!traj.validity_exit_time) traj.validity_exit_time = t;
    }
    traj.dt_history.push_back(dt);
    traj.steps.push_back(rec);
    if (lands || settings.cadence <= 0.0) {
      traj.states.push_back(state);
      if (lands) ++next_sample;
    }
  }
  return traj;
}

Trajectory subsample(const Trajectory& traj, double cadence) {
  if (cadence <= 0.0 || traj.states.size() <= 2) return traj;
  Trajectory out = traj;
  out.states.clear();
  const double t0 = traj.states.front().time;
  double next = t0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double t = traj.states[i].time;
    const bool last = i + 1 == traj.states.size();
    if (t >= next - 1e-9 * cadence || last) {
      out.states.push_back(traj.states[i]);
      while (next <= t + 1e-9 * cadence) next += cadence;
    }
  }
  return out;
}

}  // namespace vns
