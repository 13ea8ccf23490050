#include "vns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vns {

Grid::Grid(int dim, int n, double box_length) : dim_(dim), n_(n), length_(box_length) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("grid points per axis must be a power of two >= 8");
  if (!(box_length > 0.0) || !std::isfinite(box_length)) throw std::invalid_argument("box length must be positive");
  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(n);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }
double Grid::volume() const { return std::pow(length_, dim_); }

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[static_cast<std::size_t>(d)] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

std::array<double, 3> Grid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[static_cast<std::size_t>(d)] = coordinate(idx[static_cast<std::size_t>(d)]);
  return x;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw GridMismatch("grid mismatch: (dim " + std::to_string(a.dim()) + ", n " + std::to_string(a.n()) +
                       ") vs (dim " + std::to_string(b.dim()) + ", n " + std::to_string(b.n()) + ")");
  }
}

ScalarField::ScalarField(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) throw std::invalid_argument("sample count does not match grid");
  if (!all_finite()) throw std::invalid_argument("field contains non-finite samples");
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(const std::array<double, 3>&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
  return out;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) { return axpy(1.0, o); }
ScalarField& ScalarField::operator-=(const ScalarField& o) { return axpy(-1.0, o); }

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
  return *this;
}

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

VectorField::VectorField(const Grid& grid) : grid_(grid), components_(static_cast<std::size_t>(grid.dim()), ScalarField(grid)) {}

VectorField::VectorField(const Grid& grid, std::vector<ScalarField> components)
    : grid_(grid), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != grid.dim()) {
    throw std::invalid_argument("vector field needs one component per dimension");
  }
  for (const auto& c : components_) require_same_grid(grid, c.grid());
}

double VectorField::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    double s = 0.0;
    for (const auto& c : components_) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

bool VectorField::all_finite() const {
  return std::all_of(components_.begin(), components_.end(), [](const ScalarField& c) { return c.all_finite(); });
}

VectorField& VectorField::operator+=(const VectorField& o) { return axpy(1.0, o); }
VectorField& VectorField::operator-=(const VectorField& o) { return axpy(-1.0, o); }

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < components_.size(); ++i) components_[i].axpy(s, o.components_[i]);
  return *this;
}

VectorField scale(const ScalarField& s, const VectorField& u) {
  VectorField out(u.grid());
  for (int i = 0; i < u.dim(); ++i) out[i] = hadamard(s, u[i]);
  return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  for (int i = 0; i < a.dim(); ++i) out.axpy(1.0, hadamard(a[i], b[i]));
  return out;
}

}  // namespace vns
