#include "vns/oracle.hpp"

#include "vns/calculus.hpp"
#include "vns/norms.hpp"

#include <algorithm>
#include <cmath>

namespace vns {

namespace {

double phase(const ManufacturedCase& c, const std::array<double, 3>& x, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += c.k[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
  return s;
}

struct PrimitiveRates {
  ScalarField rho;
  VectorField m;
};

PrimitiveRates primitive_rhs(const FluidParams& p, const ScalarField& rho, const VectorField& m, Dealias dealias) {
  const int dim = m.dim();
  VectorField u(rho.grid());
  for (int d = 0; d < dim; ++d) {
    u[d] = ScalarField(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) u[d][i] = m[d][i] / rho[i];
  }
  PrimitiveRates r{divergence(m, dealias) * -1.0, VectorField(rho.grid())};
  ScalarField pressure(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) pressure[i] = p.A * std::pow(rho[i], p.gamma);
  const VectorField grad_p = gradient(pressure, dealias);
  const VectorField divT = stress_divergence(p, rho, u, dealias);
  for (int a = 0; a < dim; ++a) {
    VectorField flux(rho.grid());
    for (int b = 0; b < dim; ++b) flux[b] = hadamard(m[a], u[b]);
    r.m[a] = divT[a] - grad_p[a] - divergence(flux, dealias);
  }
  return r;
}

double max_gap(const ScalarField& a, const ScalarField& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

}  // namespace

ScalarField ManufacturedCase::rho(const Grid& g, double t) const {
  return ScalarField::sample(g, [&](const auto& x) { return rho_bar * (1.0 + eps * std::sin(phase(*this, x, g.dim()) - omega * t)); });
}

ScalarField ManufacturedCase::rho_t(const Grid& g, double t) const {
  return ScalarField::sample(g, [&](const auto& x) { return -rho_bar * eps * omega * std::cos(phase(*this, x, g.dim()) - omega * t); });
}

VectorField ManufacturedCase::u(const Grid& g, double t) const {
  VectorField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    const double a = U[static_cast<std::size_t>(d)];
    out[d] = ScalarField::sample(g, [&](const auto& x) { return a * std::cos(phase(*this, x, g.dim()) + nu * t); });
  }
  return out;
}

VectorField ManufacturedCase::u_t(const Grid& g, double t) const {
  VectorField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    const double a = U[static_cast<std::size_t>(d)];
    out[d] = ScalarField::sample(g, [&](const auto& x) { return -a * nu * std::sin(phase(*this, x, g.dim()) + nu * t); });
  }
  return out;
}

ReformState ManufacturedCase::state(const FluidParams& p, const Grid& g, double t) const {
  return state_from_density(p, rho(g, t), u(g, t), t);
}

ReformState ManufacturedCase::state_t(const FluidParams& p, const Grid& g, double t) const {
  const ScalarField r = rho(g, t);
  const ScalarField rt = rho_t(g, t);
  ReformState s = zero_state(g, t);
  const double e1 = 0.5 * (p.delta1 - 1.0);
  const double e2 = 0.5 * (p.gamma - 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    s.vphi[i] = e1 * std::pow(r[i], e1 - 1.0) * rt[i];
    s.phi[i] = e2 * std::pow(r[i], e2 - 1.0) * rt[i];
  }
  s.u = u_t(g, t);
  return s;
}

ReformState ManufacturedCase::reform_forcing(const FluidParams& p, const Grid& g, double t) const {
  const ReformState s = state(p, g, t);
  ReformState f = state_t(p, g, t);
  const ScalarField divu = divergence(s.u);
  f.vphi += advect(s.u, s.vphi);
  f.vphi.axpy(0.5 * (p.delta1 - 1.0), hadamard(s.vphi, divu));
  const auto [c1, c2] = convection_apply(p, s, s, Dealias::none);
  f.phi += c1;
  VectorField rest = c2 + viscous_apply(p, s.vphi, s.u, 0.0, Dealias::none);
  rest -= source_apply(p, s, s.vphi, Dealias::none);
  f.u.axpy(1.0 / p.a1, rest);
  return f;
}

std::pair<ScalarField, VectorField> ManufacturedCase::primitive_forcing(const FluidParams& p, const Grid& g,
                                                                         double t) const {
  const ScalarField r = rho(g, t);
  const ScalarField rt = rho_t(g, t);
  const VectorField v = u(g, t);
  const VectorField vt = u_t(g, t);
  const VectorField m = scale(r, v);
  const PrimitiveRates rates = primitive_rhs(p, r, m, Dealias::none);
  ScalarField fr = rt - rates.rho;
  VectorField fm(g);
  for (int d = 0; d < g.dim(); ++d) fm[d] = hadamard(rt, v[d]) + hadamard(r, vt[d]) - rates.m[d];
  return {std::move(fr), std::move(fm)};
}

double oracle_step(const FluidParams& params, const ScalarField& rho, const VectorField& u, double cfl_safety) {
  const Grid& g = rho.grid();
  double c_max = 0.0;
  double nu_max = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    c_max = std::max(c_max, std::sqrt(params.A * params.gamma * std::pow(rho[i], params.gamma - 1.0)));
    nu_max = std::max(nu_max, 2.0 * params.alpha * std::pow(rho[i], params.delta1 - 1.0) +
                                  std::abs(params.beta) * std::pow(rho[i], params.delta2 - 1.0));
  }
  const double h = g.spacing();
  const double dim = static_cast<double>(g.dim());
  const double acoustic = cfl_safety * h / (std::sqrt(dim) * (u.max_norm() + c_max) + 1e-300);
  const double viscous = nu_max > 0.0 ? 0.4 * h * h / (dim * nu_max) : acoustic;
  return std::min(acoustic, viscous);
}

PrimitiveTrajectory primitive_solve(const ScalarField& rho0, const VectorField& u0, const FluidParams& params,
                                    double T_win, const OracleSettings& settings,
                                    std::shared_ptr<const PrimitiveForcingSource> forcing) {
  require_same_grid(rho0.grid(), u0.grid());
  if (!(rho0.min() > 0.0)) throw OracleError("oracle requires min ρ>0");
  if (!(T_win > 0.0)) throw std::invalid_argument("time window must be positive");
  const Grid& g = rho0.grid();
  PrimitiveTrajectory traj;
  ScalarField rho = rho0;
  VectorField m = scale(rho0, u0);
  const auto record = [&](double t) {
    PrimitiveState s;
    s.rho = rho;
    s.u = VectorField(g);
    for (int d = 0; d < g.dim(); ++d) {
      s.u[d] = ScalarField(g);
      for (std::size_t i = 0; i < rho.size(); ++i) s.u[d][i] = m[d][i] / rho[i];
    }
    s.time = t;
    traj.states.push_back(std::move(s));
  };
  const auto rates = [&](const ScalarField& r, const VectorField& mm, double t) {
    PrimitiveRates k = primitive_rhs(params, r, mm, Dealias::two_thirds);
    if (forcing) {
      const auto [fr, fm] = forcing->at(t);
      k.rho += fr;
      k.m += fm;
    }
    return k;
  };

  std::vector<double> targets = settings.sample_times;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::remove_if(targets.begin(), targets.end(), [&](double t) { return t <= 0.0 || t >= T_win; }),
                targets.end());
  targets.push_back(T_win);
  const bool every_step = settings.sample_times.empty();

  double t = 0.0;
  std::size_t next = 0;
  record(t);
  while (t < T_win) {
    double dt = settings.dt_fixed ? *settings.dt_fixed : [&] {
      VectorField cur(g);
      for (int d = 0; d < g.dim(); ++d) {
        cur[d] = ScalarField(g);
        for (std::size_t i = 0; i < rho.size(); ++i) cur[d][i] = m[d][i] / rho[i];
      }
      return oracle_step(params, rho, cur, settings.cfl_safety);
    }();
    if (dt < 1e-14 * std::max(1.0, T_win)) throw OracleError("oracle time step underflow at t = " + std::to_string(t));
    bool lands = false;
    if (t + dt >= targets[next] - 1e-9 * dt) {
      dt = targets[next] - t;
      lands = true;
    }
    try {
      const PrimitiveRates k1 = rates(rho, m, t);
      const PrimitiveRates k2 = rates(rho + k1.rho * (0.5 * dt), m + k1.m * (0.5 * dt), t + 0.5 * dt);
      const PrimitiveRates k3 = rates(rho + k2.rho * (0.5 * dt), m + k2.m * (0.5 * dt), t + 0.5 * dt);
      const PrimitiveRates k4 = rates(rho + k3.rho * dt, m + k3.m * dt, t + dt);
      rho.axpy(dt / 6.0, k1.rho);
      rho.axpy(dt / 3.0, k2.rho);
      rho.axpy(dt / 3.0, k3.rho);
      rho.axpy(dt / 6.0, k4.rho);
      m.axpy(dt / 6.0, k1.m);
      m.axpy(dt / 3.0, k2.m);
      m.axpy(dt / 3.0, k3.m);
      m.axpy(dt / 6.0, k4.m);
    } catch (const std::invalid_argument& e) {
      throw OracleError("oracle step failed at t = " + std::to_string(t) + ": " + e.what());
    }
    if (!(rho.min() > 0.0)) throw OracleError("oracle density lost positivity at t = " + std::to_string(t));
    t = lands ? targets[next] : t + dt;
    traj.dt_history.push_back(dt);
    if (lands) ++next;
    if (lands || every_step) record(t);
  }
  return traj;
}

CrossCompareReport cross_compare(const ScalarField& rho0, const VectorField& u0, const FluidParams& params,
                                 double T_win, const PicardSettings& picard) {
  if (!(rho0.min() > 0.0)) throw OracleError("oracle requires min ρ>0");
  CrossCompareReport rep;
  const ReformState init = state_from_density(params, rho0, u0);
  const PicardResult pr = picard_solve(params, init, 0.0, T_win, picard);
  rep.trace = pr.trace;
  if (!pr.trace.converged) throw OracleError("reform side: Picard iteration did not converge");
  OracleSettings os;
  os.sample_times = pr.traj.times();
  const PrimitiveTrajectory ot = primitive_solve(rho0, u0, params, T_win, os);
  if (ot.states.size() != pr.traj.states.size()) throw OracleError("sample times of the two solvers do not match");
  for (std::size_t i = 0; i < ot.states.size(); ++i) {
    const PrimitiveState ps = reconstruct_primitive(pr.traj.states[i], params);
    const double d = std::sqrt(std::pow(l2_norm(ps.rho - ot.states[i].rho), 2) + std::pow(l2_norm(ps.u - ot.states[i].u), 2));
    rep.times.push_back(ps.time);
    rep.distance.push_back(d);
    rep.sup_distance = std::max(rep.sup_distance, d);
  }
  const double mean = integral(rho0) / rho0.grid().volume();
  rep.amplitude = max_gap(rho0, ScalarField(rho0.grid(), mean)) + u0.max_norm();
  rep.reform_mass_drift = conservation(pr.traj, params).mass_drift;
  const double m0 = integral(ot.states.front().rho);
  for (const auto& s : ot.states) rep.oracle_mass_drift = std::max(rep.oracle_mass_drift, std::abs(integral(s.rho) - m0) / m0);
  return rep;
}

bool MmsOrders::any_flagged() const { return std::any_of(flagged.begin(), flagged.end(), [](bool b) { return b; }); }

MmsOrders mms_orders(const std::vector<double>& errors) {
  if (errors.size() < 2) throw std::invalid_argument("convergence orders need at least two levels");
  MmsOrders out;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double a = errors[i];
    const double b = errors[i + 1];
    if (!(a > 0.0) || !(b > 0.0) || a == b) {
      out.orders.push_back(0.0);
      out.flagged.push_back(true);
      continue;
    }
    out.orders.push_back(std::log2(a / b));
    out.flagged.push_back(b > a);
  }
  return out;
}

std::vector<double> mms_reform_errors(const ManufacturedCase& c, const FluidParams& p, const Grid& g, double T,
                                      const std::vector<double>& dts) {
  std::vector<double> errors;
  const ReformState exact = c.state(p, g, T);
  for (double dt : dts) {
    FrozenCoefficients fc{std::make_shared<ManufacturedCoefficients>(c, p, g), std::make_shared<ManufacturedForcing>(c, p, g), 0.0, T};
    SolverSettings s;
    s.dt_fixed = dt;
    s.cadence = T;
    const Trajectory tr = solve_linearized(p, c.state(p, g, 0.0), fc, s);
    const ReformState& fin = tr.back();
    errors.push_back(std::sqrt(std::pow(l2_norm(fin.vphi - exact.vphi), 2) + std::pow(l2_norm(fin.phi - exact.phi), 2) +
                               std::pow(l2_norm(fin.u - exact.u), 2)));
  }
  return errors;
}

std::vector<double> mms_oracle_errors(const ManufacturedCase& c, const FluidParams& p, const Grid& g, double T,
                                      const std::vector<double>& dts) {
  std::vector<double> errors;
  const ScalarField rho_T = c.rho(g, T);
  const VectorField u_T = c.u(g, T);
  for (double dt : dts) {
    OracleSettings s;
    s.dt_fixed = dt;
    s.sample_times = {T};
    const PrimitiveTrajectory tr =
        primitive_solve(c.rho(g, 0.0), c.u(g, 0.0), p, T, s, std::make_shared<ManufacturedPrimitiveForcing>(c, p, g));
    const PrimitiveState& fin = tr.states.back();
    errors.push_back(std::sqrt(std::pow(l2_norm(fin.rho - rho_T), 2) + std::pow(l2_norm(fin.u - u_T), 2)));
  }
  return errors;
}

SpatialResidual mms_spatial_residual(const ManufacturedCase& c, const FluidParams& p, const Grid& g, double t) {
  SpatialResidual r;
  const ReformState s = c.state(p, g, t);
  const ReformState st = c.state_t(p, g, t);
  const ReformState f = c.reform_forcing(p, g, t);
  const ScalarField rv = transport_rhs(p, s.vphi, s, &f) - st.vphi;
  const auto [c1, c2] = convection_apply(p, s, s, Dealias::two_thirds);
  ScalarField rp = f.phi - c1 - st.phi;
  VectorField ru = viscous_rate(p, s.vphi, s.u, 0.0);
  ru.axpy(-1.0 / p.a1, c2);
  ru.axpy(1.0 / p.a1, source_apply(p, s, s.vphi, Dealias::two_thirds));
  ru += f.u;
  ru -= st.u;
  const double scale_reform =
      std::sqrt(std::pow(l2_norm(st.vphi), 2) + std::pow(l2_norm(st.phi), 2) + std::pow(l2_norm(st.u), 2));
  r.reform = std::sqrt(std::pow(l2_norm(rv), 2) + std::pow(l2_norm(rp), 2) + std::pow(l2_norm(ru), 2)) / scale_reform;

  const ScalarField rho = c.rho(g, t);
  const VectorField m = scale(rho, c.u(g, t));
  const PrimitiveRates k = primitive_rhs(p, rho, m, Dealias::two_thirds);
  const auto [fr, fm] = c.primitive_forcing(p, g, t);
  const ScalarField rt = c.rho_t(g, t);
  VectorField mt(g);
  for (int d = 0; d < g.dim(); ++d) mt[d] = hadamard(rt, c.u(g, t)[d]) + hadamard(rho, c.u_t(g, t)[d]);
  const ScalarField er = k.rho + fr - rt;
  const VectorField em = k.m + fm - mt;
  r.primitive = std::sqrt(std::pow(l2_norm(er), 2) + std::pow(l2_norm(em), 2)) /
                std::sqrt(std::pow(l2_norm(rt), 2) + std::pow(l2_norm(mt), 2));
  return r;
}

}  // namespace vns
