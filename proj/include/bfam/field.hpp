#ifndef BFAM_FIELD_HPP
#define BFAM_FIELD_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bfam/grid.hpp"

namespace bfam {

/// Thrown when two operands live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  GridMismatch() : std::invalid_argument("fields live on different grids") {}
};

/// Thrown when a field would hold NaN or Inf.
class NonFiniteValue : public std::domain_error {
 public:
  NonFiniteValue(int index, double value);
  int index() const { return index_; }

 private:
  int index_;
};

/// Real samples on a uniform periodic grid. Values are always finite.
class Field {
 public:
  Field(const Grid& grid, std::vector<double> values);

  static Field zeros(const Grid& grid);
  static Field constant(const Grid& grid, double c);
  static Field sample(const Grid& grid, const std::function<double(double)>& fn);

  const Grid& grid() const { return grid_; }
  int size() const { return grid_.n_points; }
  std::span<const double> values() const { return values_; }
  double operator[](int j) const { return values_[j]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double c);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator*(double c, Field a) { return a *= c; }
  friend Field operator-(Field a) { return a *= -1.0; }

  /// Bitwise equality of grid and samples.
  friend bool operator==(const Field&, const Field&) = default;

 private:
  void check_finite() const;

  Grid grid_;
  std::vector<double> values_;
};

void require_same_grid(const Field& a, const Field& b);

/// max_j |f_j|
double sup_norm(const Field& f);

/// Rectangle-rule L2 norm sqrt(h sum f_j^2).
double l2_norm(const Field& f);

}  // namespace bfam

#endif
