#include "vns/norms.hpp"

#include "vns/calculus.hpp"
#include "vns/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace vns {

namespace {

// Sum_k w_k m(|k|^2) |f_k|^2 scaled to the L2 quadrature.
template <class Multiplier>
double spectral_square(const ScalarField& f, Multiplier mult) {
  const Spectral sp(f.grid());
  const auto spec = sp.forward(f.values());
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    acc += sp.parseval_weight(i) * mult(sp.wavenumber_sq(i)) * std::norm(spec[i]);
  }
  const double nn = static_cast<double>(f.grid().size());
  return acc * f.grid().volume() / (nn * nn);
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// All multi-indices of total order k in dim dimensions with their
// multiplicities as ordered tuples (multinomial coefficients).
std::vector<std::pair<MultiIndex, double>> orders_of(int dim, int k) {
  std::vector<std::pair<MultiIndex, double>> out;
  const auto fact = [](int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b <= k - a; ++b) {
      const int c = k - a - b;
      const MultiIndex m{a, b, c};
      if ((dim < 2 && b > 0) || (dim < 3 && c > 0)) continue;
      out.emplace_back(m, fact(k) / (fact(a) * fact(b) * fact(c)));
    }
  }
  return out;
}

}  // namespace

double sobolev_norm(const ScalarField& f, int s) {
  if (s < 0 || s > 3) throw std::invalid_argument("sobolev_norm supports s = 0..3");
  return std::sqrt(spectral_square(f, [s](double k2) { return ipow(1.0 + k2, s); }));
}

double sobolev_norm(const VectorField& u, int s) {
  double acc = 0.0;
  for (int d = 0; d < u.dim(); ++d) acc += ipow(sobolev_norm(u[d], s), 2);
  return std::sqrt(acc);
}

double seminorm(const ScalarField& f, int k) {
  if (k < 0 || k > kMaxDerivativeOrder) throw std::invalid_argument("seminorm supports k = 0..4");
  return std::sqrt(spectral_square(f, [k](double k2) { return ipow(k2, k); }));
}

double seminorm(const VectorField& u, int k) {
  double acc = 0.0;
  for (int d = 0; d < u.dim(); ++d) acc += ipow(seminorm(u[d], k), 2);
  return std::sqrt(acc);
}

double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return std::sqrt(acc * f.grid().cell_volume());
}

double l2_norm(const VectorField& u) {
  double acc = 0.0;
  for (int d = 0; d < u.dim(); ++d) acc += ipow(l2_norm(u[d]), 2);
  return std::sqrt(acc);
}

double linf_norm(const ScalarField& f) { return f.max_abs(); }

double linf_norm(const VectorField& u) { return u.max_norm(); }

double integral(const ScalarField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v;
  return acc * f.grid().cell_volume();
}

double weighted_seminorm(const ScalarField& w, const VectorField& u, int k) {
  require_same_grid(w.grid(), u.grid());
  if (k < 0 || k > kMaxDerivativeOrder) throw std::invalid_argument("weighted_seminorm supports k = 0..4");
  double acc = 0.0;
  const auto orders = orders_of(u.dim(), k);
  for (int d = 0; d < u.dim(); ++d) {
    for (const auto& [order, mult] : orders) {
      const ScalarField dk = derivative(u[d], order);
      double part = 0.0;
      for (std::size_t i = 0; i < dk.size(); ++i) {
        const double v = w[i] * dk[i];
        part += v * v;
      }
      acc += mult * part;
    }
  }
  return std::sqrt(acc * u.grid().cell_volume());
}

NormReport norm_report(const ScalarField& f) {
  NormReport r;
  for (int s = 0; s <= 3; ++s) {
    r.h_norms[static_cast<std::size_t>(s)] = sobolev_norm(f, s);
    r.seminorms[static_cast<std::size_t>(s)] = seminorm(f, s);
  }
  r.linf = linf_norm(f);
  return r;
}

NormReport norm_report(const VectorField& u, const ScalarField& weight) {
  NormReport r;
  for (int s = 0; s <= 3; ++s) {
    r.h_norms[static_cast<std::size_t>(s)] = sobolev_norm(u, s);
    r.seminorms[static_cast<std::size_t>(s)] = seminorm(u, s);
  }
  for (int k = 2; k <= 4; ++k) r.weighted[static_cast<std::size_t>(k)] = weighted_seminorm(weight, u, k);
  r.linf = linf_norm(u);
  return r;
}

}  // namespace vns
