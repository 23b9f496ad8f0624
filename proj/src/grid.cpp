#include "bfam/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bfam {

Grid make_grid(double half_length, int n_points) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw std::invalid_argument("grid half-length must be positive, got " + std::to_string(half_length));
  if (n_points < 16 || (n_points & (n_points - 1)) != 0)
    throw std::invalid_argument("grid size must be a power of two >= 16, got " + std::to_string(n_points));
  return Grid{half_length, n_points, 2.0 * half_length / n_points};
}

}  // namespace bfam
