#include "vns/gmres.hpp"

#include <algorithm>
#include <cmath>

namespace vns {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

GmresResult gmres(const LinearMap& A, const LinearMap& M, const std::vector<double>& b, std::vector<double>& x,
                  const GmresOptions& opt) {
  const std::size_t n = b.size();
  GmresResult res;
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }
  const double target = std::max(opt.rel_tol * bnorm, opt.abs_tol);
  std::vector<double> r(n), w(n), z(n);
  const std::size_t m = opt.restart;
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1);

  while (true) {
    A(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    double beta = norm(r);
    res.residual = beta / bnorm;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= opt.max_iter) return res;

    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t k = 0;
    for (; k < m && res.iterations < opt.max_iter; ++k) {
      ++res.iterations;
      M(V[k], z);
      A(z, w);
      for (std::size_t j = 0; j <= k; ++j) {
        H[j][k] = dot(w, V[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= H[j][k] * V[j][i];
      }
      H[k + 1][k] = norm(w);
      if (H[k + 1][k] > 0.0) {
        for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / H[k + 1][k];
      }
      for (std::size_t j = 0; j < k; ++j) {
        const double t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -sn[j] * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const double h = std::hypot(H[k][k], H[k + 1][k]);
      if (h == 0.0) break;
      cs[k] = H[k][k] / h;
      sn[k] = H[k + 1][k] / h;
      H[k][k] = h;
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= target) {
        ++k;
        break;
      }
    }
    // Back substitution for the Krylov coefficients, then x += M V y.
    std::vector<double> y(k);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t j = ii + 1; j < k; ++j) s -= H[ii][j] * y[j];
      y[ii] = s / H[ii][ii];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) w[i] += y[j] * V[j][i];
    }
    M(w, z);
    for (std::size_t i = 0; i < n; ++i) x[i] += z[i];
  }
}

}  // namespace vns
