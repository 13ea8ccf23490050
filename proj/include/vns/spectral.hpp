#pragma once

#include "vns/grid.hpp"

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace vns {

using Complex = std::complex<double>;

struct SpectralTables;

/// Real-to-complex Fourier transforms on a Grid (FFTW backed).
///
/// forward() is unnormalized; inverse() divides by the sample count, so
/// inverse(forward(f)) == f. Plans are cached per (dim, n) and shared by all
/// instances; transforms are safe to run concurrently.
class Spectral {
 public:
  explicit Spectral(const Grid& grid);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  /// Number of stored complex coefficients (half spectrum on the last axis).
  [[nodiscard]] std::size_t spectrum_size() const;

  [[nodiscard]] std::vector<Complex> forward(std::span<const double> samples) const;
  [[nodiscard]] std::vector<double> inverse(std::span<const Complex> spectrum) const;

  /// Signed integer mode numbers of coefficient idx (unused axes are 0).
  [[nodiscard]] const std::array<int, 3>& mode(std::size_t idx) const;
  /// Angular wavenumber 2*pi*mode/L along an axis.
  [[nodiscard]] double wavenumber(std::size_t idx, int axis) const;
  [[nodiscard]] double wavenumber_sq(std::size_t idx) const;
  /// True when |mode| < n/3 along every axis.
  [[nodiscard]] bool in_two_thirds_band(std::size_t idx) const;
  [[nodiscard]] bool is_nyquist(std::size_t idx, int axis) const;
  /// Multiplicity of the coefficient in a full-spectrum sum (1 or 2).
  [[nodiscard]] double parseval_weight(std::size_t idx) const;

 private:
  Grid grid_;
  std::shared_ptr<const SpectralTables> tables_;
};

}  // namespace vns
