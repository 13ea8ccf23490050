#include "vns/params.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vns {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Exact value of a finite double.
Rational exact(double x) {
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  // 53 bits of mantissa fit in an int64 after scaling.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  exp -= 53;
  if (exp > 0) {
    r *= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), exp);
  } else if (exp < 0) {
    r /= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), -exp);
  }
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

double FluidParams::bulk_coefficient(double vphi) const {
  if (vphi <= 1e-300) return alpha;
  return alpha + beta * std::exp(2.0 * m * std::log(vphi));
}

double FluidParams::sound_speed_factor() const { return (gamma - 1.0) / (2.0 * std::sqrt(a1)); }

std::string describe(Constraint c) {
  switch (c) {
    case Constraint::none: return "admissible";
    case Constraint::finite: return "all constants finite";
    case Constraint::pressure_positive: return "A > 0";
    case Constraint::gamma_gt_one: return "gamma > 1";
    case Constraint::alpha_positive: return "alpha > 0";
    case Constraint::delta1_gt_one: return "delta1 > 1";
    case Constraint::delta2_gt_delta1: return "delta2 > delta1";
    case Constraint::delta2_lower_bound: return "delta2 >= (5/2)delta1 - 3/2";
    case Constraint::min_delta1_gamma: return "min(delta1, gamma) <= 3";
  }
  return "unknown";
}

ParamCheck check_params(const RawParams& p) {
  auto fail = [](Constraint c, std::string detail) {
    return ParamCheck{c, "violated: " + describe(c) + " (" + std::move(detail) + ")"};
  };
  for (double v : {p.A, p.gamma, p.alpha, p.beta, p.delta1, p.delta2}) {
    if (!std::isfinite(v)) return fail(Constraint::finite, "non-finite input");
  }
  const Rational A = exact(p.A), g = exact(p.gamma), al = exact(p.alpha);
  const Rational d1 = exact(p.delta1), d2 = exact(p.delta2);

  if (!(A > 0)) return fail(Constraint::pressure_positive, "A = " + fmt(p.A));
  if (!(g > 1)) return fail(Constraint::gamma_gt_one, "gamma = " + fmt(p.gamma));
  if (!(al > 0)) return fail(Constraint::alpha_positive, "alpha = " + fmt(p.alpha));
  if (!(d1 > 1)) return fail(Constraint::delta1_gt_one, "delta1 = " + fmt(p.delta1));
  if (!(d2 > d1)) {
    return fail(Constraint::delta2_gt_delta1, "delta2 = " + fmt(p.delta2) + " <= delta1 = " + fmt(p.delta1));
  }
  const Rational bound = Rational(5, 2) * d1 - Rational(3, 2);
  if (d2 < bound) {
    return fail(Constraint::delta2_lower_bound, "delta2 = " + fmt(p.delta2) + " < (5/2)delta1 - 3/2 = " +
                                                    fmt(static_cast<double>(bound)));
  }
  if (!(d1 <= 3 || g <= 3)) {
    return fail(Constraint::min_delta1_gamma, "delta1 = " + fmt(p.delta1) + ", gamma = " + fmt(p.gamma));
  }
  return {};
}

FluidParams validate_params(const RawParams& raw) {
  const ParamCheck check = check_params(raw);
  if (!check.ok()) throw ParamError(check.violated, check.message);

  FluidParams p;
  p.A = raw.A;
  p.gamma = raw.gamma;
  p.alpha = raw.alpha;
  p.beta = raw.beta;
  p.delta1 = raw.delta1;
  p.delta2 = raw.delta2;
  p.a1 = (raw.gamma - 1.0) * (raw.gamma - 1.0) / (4.0 * raw.A * raw.gamma);
  p.m = (raw.delta2 - raw.delta1) / (raw.delta1 - 1.0);
  if (raw.beta < 0.0) {
    p.a2_density_cap = std::pow(-raw.alpha / (3.0 * raw.beta), 1.0 / (raw.delta2 - raw.delta1));
  }
  // delta2 >= (5/2)delta1 - 3/2 with delta1 > 1 is equivalent to m >= 3/2.
  if (p.m < 1.5 * (1.0 - 1e-15)) {
    throw ParamError(Constraint::delta2_lower_bound, "derived exponent ratio m < 3/2");
  }
  return p;
}

CompatibilityReport check_initial_compatibility(const FluidParams& params, const ScalarField& rho0) {
  CompatibilityReport r;
  const double power = params.delta2 - params.delta1;
  r.margin = std::numeric_limits<double>::infinity();
  r.max_rho = -1.0;
  for (std::size_t i = 0; i < rho0.size(); ++i) {
    const double rho = rho0[i];
    if (rho < 0.0) throw std::invalid_argument("initial density has negative samples");
    const double coeff = params.alpha + (rho > 1e-300 ? params.beta * std::exp(power * std::log(rho)) : 0.0);
    r.margin = std::min(r.margin, coeff);
    if (rho > r.max_rho) {
      r.max_rho = rho;
      r.worst_index = i;
    }
  }
  r.worst_point = rho0.grid().point(r.worst_index);
  if (params.a2_density_cap && r.max_rho > *params.a2_density_cap) {
    r.pass = false;
    std::ostringstream os;
    os << "(A2) violated: max rho0 = " << r.max_rho << " exceeds (-alpha/(3 beta))^(1/(delta2-delta1)) = "
       << *params.a2_density_cap << " at x = (";
    for (int d = 0; d < rho0.grid().dim(); ++d) os << (d ? ", " : "") << r.worst_point[static_cast<std::size_t>(d)];
    os << ")";
    r.message = os.str();
  }
  return r;
}

}  // namespace vns
