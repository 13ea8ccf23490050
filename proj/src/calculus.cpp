#include "vns/calculus.hpp"

#include "vns/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vns {

namespace {

// (i k)^order, with the Nyquist coefficient dropped on axes of odd order.
Complex multiplier(const Spectral& sp, std::size_t idx, const MultiIndex& order, Dealias dealias) {
  if (dealias == Dealias::two_thirds && !sp.in_two_thirds_band(idx)) return {0.0, 0.0};
  Complex mult{1.0, 0.0};
  for (int d = 0; d < sp.grid().dim(); ++d) {
    const int p = order[static_cast<std::size_t>(d)];
    if (p == 0) continue;
    if ((p % 2) == 1 && sp.is_nyquist(idx, d)) return {0.0, 0.0};
    const Complex ik{0.0, sp.wavenumber(idx, d)};
    for (int q = 0; q < p; ++q) mult *= ik;
  }
  return mult;
}

void check_order(const Grid& g, const MultiIndex& order) {
  int total = 0;
  for (int d = 0; d < 3; ++d) {
    const int p = order[static_cast<std::size_t>(d)];
    if (p < 0) throw std::invalid_argument("negative derivative order");
    if (p > 0 && d >= g.dim()) throw std::invalid_argument("derivative along an axis the grid does not have");
    total += p;
  }
  if (total > kMaxDerivativeOrder) throw std::invalid_argument("derivative order above 4 is not supported");
}

ScalarField apply(const Spectral& sp, const std::vector<Complex>& spec, const MultiIndex& order, Dealias dealias) {
  std::vector<Complex> work(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) work[i] = spec[i] * multiplier(sp, i, order, dealias);
  return ScalarField(sp.grid(), sp.inverse(work));
}

MultiIndex unit(int axis, int times = 1) {
  MultiIndex m{0, 0, 0};
  m[static_cast<std::size_t>(axis)] = times;
  return m;
}

}  // namespace

ScalarField derivative(const ScalarField& f, const MultiIndex& order, Dealias dealias) {
  check_order(f.grid(), order);
  const Spectral sp(f.grid());
  return apply(sp, sp.forward(f.values()), order, dealias);
}

VectorField gradient(const ScalarField& f, Dealias dealias) {
  const Spectral sp(f.grid());
  const auto spec = sp.forward(f.values());
  VectorField g(f.grid());
  for (int d = 0; d < f.grid().dim(); ++d) g[d] = apply(sp, spec, unit(d), dealias);
  return g;
}

ScalarField divergence(const VectorField& u, Dealias dealias) {
  const Spectral sp(u.grid());
  std::vector<Complex> acc(sp.spectrum_size());
  for (int d = 0; d < u.dim(); ++d) {
    const auto spec = sp.forward(u[d].values());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += spec[i] * multiplier(sp, i, unit(d), dealias);
  }
  return ScalarField(u.grid(), sp.inverse(acc));
}

ScalarField laplacian(const ScalarField& f, Dealias dealias) {
  const Spectral sp(f.grid());
  auto spec = sp.forward(f.values());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (dealias == Dealias::two_thirds && !sp.in_two_thirds_band(i)) {
      spec[i] = 0.0;
    } else {
      spec[i] *= -sp.wavenumber_sq(i);
    }
  }
  return ScalarField(f.grid(), sp.inverse(spec));
}

VectorField laplacian(const VectorField& u, Dealias dealias) {
  VectorField out(u.grid());
  for (int d = 0; d < u.dim(); ++d) out[d] = laplacian(u[d], dealias);
  return out;
}

VectorField grad_div(const VectorField& u, Dealias dealias) {
  const Spectral sp(u.grid());
  const int dim = u.dim();
  std::vector<std::vector<Complex>> specs;
  for (int d = 0; d < dim; ++d) specs.push_back(sp.forward(u[d].values()));
  VectorField out(u.grid());
  for (int i = 0; i < dim; ++i) {
    std::vector<Complex> acc(sp.spectrum_size());
    for (int j = 0; j < dim; ++j) {
      MultiIndex order{0, 0, 0};
      order[static_cast<std::size_t>(i)] += 1;
      order[static_cast<std::size_t>(j)] += 1;
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += specs[static_cast<std::size_t>(j)][k] * multiplier(sp, k, order, dealias);
    }
    out[i] = ScalarField(u.grid(), sp.inverse(acc));
  }
  return out;
}

std::vector<std::vector<ScalarField>> jacobian(const VectorField& u, Dealias dealias) {
  std::vector<std::vector<ScalarField>> J;
  for (int i = 0; i < u.dim(); ++i) {
    const VectorField g = gradient(u[i], dealias);
    std::vector<ScalarField> row;
    for (int j = 0; j < u.dim(); ++j) row.push_back(g[j]);
    J.push_back(std::move(row));
  }
  return J;
}

ScalarField advect(const VectorField& w, const ScalarField& f, Dealias dealias) {
  return dot(w, gradient(f, dealias));
}

ScalarField dealias(const ScalarField& f) {
  const Spectral sp(f.grid());
  auto spec = sp.forward(f.values());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!sp.in_two_thirds_band(i)) spec[i] = 0.0;
  }
  return ScalarField(f.grid(), sp.inverse(spec));
}

double interpolate(const ScalarField& f, const std::array<double, 3>& x) {
  const Spectral sp(f.grid());
  const auto spec = sp.forward(f.values());
  const Grid& g = f.grid();
  const double n_total = static_cast<double>(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double phase = 0.0;
    bool nyquist = false;
    for (int d = 0; d < g.dim(); ++d) {
      // Samples sit at x_j = -L/2 + j h, so shift to the FFT origin.
      phase += sp.wavenumber(i, d) * (x[static_cast<std::size_t>(d)] + 0.5 * g.box_length());
      nyquist = nyquist || sp.is_nyquist(i, d);
    }
    // Nyquist terms contribute their real (cosine) part only.
    const Complex term = spec[i] * Complex(std::cos(phase), std::sin(phase));
    acc += sp.parseval_weight(i) * (nyquist ? spec[i].real() * std::cos(phase) : term.real());
  }
  return acc / n_total;
}

ScalarField resample(const ScalarField& f, const Grid& target) {
  const Grid& src = f.grid();
  if (src.dim() != target.dim() || src.box_length() != target.box_length()) {
    throw GridMismatch("resample needs the same box and dimension");
  }
  if (src == target) return f;
  const Spectral from(src);
  const Spectral to(target);
  const auto spec = from.forward(f.values());
  const int nmin = std::min(src.n(), target.n());
  // Map coefficients by mode number.
  std::vector<Complex> out(to.spectrum_size());
  const int nt = target.n();
  const std::size_t last_t = static_cast<std::size_t>(nt / 2 + 1);
  const double scale = static_cast<double>(target.size()) / static_cast<double>(src.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& m = from.mode(i);
    bool keep = true;
    for (int d = 0; d < src.dim(); ++d) {
      // Drop the Nyquist plane of the smaller grid: it is not shared.
      if (2 * std::abs(m[static_cast<std::size_t>(d)]) >= nmin) keep = false;
    }
    if (!keep) continue;
    std::size_t flat = 0;
    for (int d = 0; d < src.dim() - 1; ++d) {
      const int k = m[static_cast<std::size_t>(d)];
      flat = flat * static_cast<std::size_t>(nt) + static_cast<std::size_t>(k >= 0 ? k : k + nt);
    }
    flat = flat * last_t + static_cast<std::size_t>(m[static_cast<std::size_t>(src.dim() - 1)]);
    out[flat] = spec[i] * scale;
  }
  return ScalarField(target, to.inverse(out));
}

VectorField resample(const VectorField& u, const Grid& target) {
  VectorField out(target);
  for (int d = 0; d < u.dim(); ++d) out[d] = resample(u[d], target);
  return out;
}

}  // namespace vns
