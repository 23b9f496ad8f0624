#include "bfam/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bfam {

NonFiniteValue::NonFiniteValue(int index, double value)
    : std::domain_error("non-finite field value " + std::to_string(value) + " at index " +
                        std::to_string(index)),
      index_(index) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.n_points)
    throw std::invalid_argument("field has " + std::to_string(values_.size()) + " samples, grid has " +
                                std::to_string(grid_.n_points));
  check_finite();
}

void Field::check_finite() const {
  for (int j = 0; j < grid_.n_points; ++j)
    if (!std::isfinite(values_[j])) throw NonFiniteValue(j, values_[j]);
}

Field Field::zeros(const Grid& grid) { return Field(grid, std::vector<double>(grid.n_points, 0.0)); }

Field Field::constant(const Grid& grid, double c) { return Field(grid, std::vector<double>(grid.n_points, c)); }

Field Field::sample(const Grid& grid, const std::function<double(double)>& fn) {
  std::vector<double> v(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) v[j] = fn(grid.x(j));
  return Field(grid, std::move(v));
}

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch();
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (int j = 0; j < size(); ++j) values_[j] += other.values_[j];
  check_finite();
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (int j = 0; j < size(); ++j) values_[j] -= other.values_[j];
  check_finite();
  return *this;
}

Field& Field::operator*=(double c) {
  for (double& v : values_) v *= c;
  check_finite();
  return *this;
}

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const Field& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return std::sqrt(f.grid().spacing * acc);
}

}  // namespace bfam
