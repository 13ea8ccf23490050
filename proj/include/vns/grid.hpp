#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vns {

/// Isotropic periodic box [-L/2, L/2)^dim sampled at n points per axis.
///
/// Samples are stored row-major with axis 0 slowest. The box stands in for
/// R^dim: data are expected to be compactly supported well inside it.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int n, double box_length);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] double box_length() const { return length_; }
  [[nodiscard]] double spacing() const { return length_ / n_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] double volume() const;

  /// Coordinate of index i along any axis.
  [[nodiscard]] double coordinate(int i) const { return -0.5 * length_ + i * spacing(); }
  /// Per-axis indices of a flat sample index (unused axes are 0).
  [[nodiscard]] std::array<int, 3> unflatten(std::size_t flat) const;
  [[nodiscard]] std::array<double, 3> point(std::size_t flat) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int dim_ = 1;
  int n_ = 8;
  double length_ = 1.0;
  std::size_t size_ = 8;
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_same_grid(const Grid& a, const Grid& b);

/// Real samples on a grid; a value type.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double value = 0.0);
  /// Throws if the sample count is wrong or any value is not finite.
  ScalarField(const Grid& grid, std::vector<double> values);

  /// Samples f at every grid point.
  static ScalarField sample(const Grid& grid, const std::function<double(const std::array<double, 3>&)>& f);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  /// this += s * o
  ScalarField& axpy(double s, const ScalarField& o);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Pointwise product.
[[nodiscard]] ScalarField hadamard(const ScalarField& a, const ScalarField& b);

/// dim components on a common grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid);
  VectorField(const Grid& grid, std::vector<ScalarField> components);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] int dim() const { return static_cast<int>(components_.size()); }
  ScalarField& operator[](int i) { return components_[static_cast<std::size_t>(i)]; }
  const ScalarField& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }

  /// Largest Euclidean length over the grid.
  [[nodiscard]] double max_norm() const;
  [[nodiscard]] bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  VectorField& axpy(double s, const VectorField& o);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(VectorField a, double s) { return a *= s; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<ScalarField> components_;
};

/// Componentwise product s * u.
[[nodiscard]] VectorField scale(const ScalarField& s, const VectorField& u);
/// Pointwise a . b
[[nodiscard]] ScalarField dot(const VectorField& a, const VectorField& b);

}  // namespace vns
