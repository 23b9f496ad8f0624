#ifndef BFAM_GRID_HPP
#define BFAM_GRID_HPP

#include <numbers>

namespace bfam {

/// Uniform periodic grid on [-L, L) with N points, x_j = -L + j h.
struct Grid {
  double half_length = 0.0;
  int n_points = 0;
  double spacing = 0.0;

  double x(int j) const { return -half_length + j * spacing; }
  double period() const { return 2.0 * half_length; }

  /// Angular wavenumber of the signed mode index k.
  double wavenumber(int k) const { return std::numbers::pi * k / half_length; }

  /// Half-spectrum size of the real transform (N/2 + 1).
  int n_modes() const { return n_points / 2 + 1; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws std::invalid_argument unless L > 0 and N is a power of two >= 16.
Grid make_grid(double half_length, int n_points);

}  // namespace bfam

#endif
