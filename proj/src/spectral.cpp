#include "vns/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace vns {

struct SpectralTables {
  int dim = 1;
  int n = 8;
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  std::vector<std::array<int, 3>> modes;
  std::vector<double> weight;

  SpectralTables() = default;
  SpectralTables(const SpectralTables&) = delete;
  SpectralTables& operator=(const SpectralTables&) = delete;
  ~SpectralTables() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct AlignedReal {
  explicit AlignedReal(std::size_t n) : p(fftw_alloc_real(n)) {}
  ~AlignedReal() { fftw_free(p); }
  AlignedReal(const AlignedReal&) = delete;
  AlignedReal& operator=(const AlignedReal&) = delete;
  double* p;
};

struct AlignedComplex {
  explicit AlignedComplex(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~AlignedComplex() { fftw_free(p); }
  AlignedComplex(const AlignedComplex&) = delete;
  AlignedComplex& operator=(const AlignedComplex&) = delete;
  fftw_complex* p;
};

std::shared_ptr<const SpectralTables> build_tables(int dim, int n) {
  auto t = std::make_shared<SpectralTables>();
  t->dim = dim;
  t->n = n;
  t->real_size = 1;
  for (int d = 0; d < dim; ++d) t->real_size *= static_cast<std::size_t>(n);
  const std::size_t last = static_cast<std::size_t>(n / 2 + 1);
  t->complex_size = t->real_size / static_cast<std::size_t>(n) * last;

  std::array<int, 3> dims{n, n, n};
  AlignedReal in(t->real_size);
  AlignedComplex out(t->complex_size);
  t->r2c = fftw_plan_dft_r2c(dim, dims.data(), in.p, out.p, FFTW_ESTIMATE);
  t->c2r = fftw_plan_dft_c2r(dim, dims.data(), out.p, in.p, FFTW_ESTIMATE);

  t->modes.resize(t->complex_size);
  t->weight.resize(t->complex_size);
  for (std::size_t idx = 0; idx < t->complex_size; ++idx) {
    std::size_t rem = idx;
    std::array<int, 3> mode{0, 0, 0};
    const int kl = static_cast<int>(rem % last);
    rem /= last;
    mode[static_cast<std::size_t>(dim - 1)] = kl;
    for (int d = dim - 2; d >= 0; --d) {
      const int k = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
      mode[static_cast<std::size_t>(d)] = k <= n / 2 ? k : k - n;
    }
    t->modes[idx] = mode;
    t->weight[idx] = (kl == 0 || kl == n / 2) ? 1.0 : 2.0;
  }
  return t;
}

std::shared_ptr<const SpectralTables> tables_for(int dim, int n) {
  static std::map<std::pair<int, int>, std::shared_ptr<const SpectralTables>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{dim, n}];
  if (!slot) slot = build_tables(dim, n);
  return slot;
}

}  // namespace

Spectral::Spectral(const Grid& grid) : grid_(grid), tables_(tables_for(grid.dim(), grid.n())) {}

std::size_t Spectral::spectrum_size() const { return tables_->complex_size; }

std::vector<Complex> Spectral::forward(std::span<const double> samples) const {
  AlignedReal in(tables_->real_size);
  AlignedComplex out(tables_->complex_size);
  std::memcpy(in.p, samples.data(), tables_->real_size * sizeof(double));
  fftw_execute_dft_r2c(tables_->r2c, in.p, out.p);
  std::vector<Complex> result(tables_->complex_size);
  std::memcpy(static_cast<void*>(result.data()), out.p, tables_->complex_size * sizeof(fftw_complex));
  return result;
}

std::vector<double> Spectral::inverse(std::span<const Complex> spectrum) const {
  AlignedComplex in(tables_->complex_size);
  AlignedReal out(tables_->real_size);
  std::memcpy(in.p, spectrum.data(), tables_->complex_size * sizeof(fftw_complex));
  fftw_execute_dft_c2r(tables_->c2r, in.p, out.p);
  std::vector<double> result(tables_->real_size);
  const double norm = 1.0 / static_cast<double>(tables_->real_size);
  for (std::size_t i = 0; i < tables_->real_size; ++i) result[i] = out.p[i] * norm;
  return result;
}

const std::array<int, 3>& Spectral::mode(std::size_t idx) const { return tables_->modes[idx]; }

double Spectral::wavenumber(std::size_t idx, int axis) const {
  return 2.0 * std::numbers::pi / grid_.box_length() * tables_->modes[idx][static_cast<std::size_t>(axis)];
}

double Spectral::wavenumber_sq(std::size_t idx) const {
  double s = 0.0;
  for (int d = 0; d < grid_.dim(); ++d) {
    const double k = wavenumber(idx, d);
    s += k * k;
  }
  return s;
}

bool Spectral::in_two_thirds_band(std::size_t idx) const {
  const auto& m = tables_->modes[idx];
  for (int d = 0; d < grid_.dim(); ++d) {
    if (3 * std::abs(m[static_cast<std::size_t>(d)]) >= grid_.n()) return false;
  }
  return true;
}

bool Spectral::is_nyquist(std::size_t idx, int axis) const {
  return std::abs(tables_->modes[idx][static_cast<std::size_t>(axis)]) == grid_.n() / 2;
}

double Spectral::parseval_weight(std::size_t idx) const { return tables_->weight[idx]; }

}  // namespace vns
