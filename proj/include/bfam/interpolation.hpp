#ifndef BFAM_INTERPOLATION_HPP
#define BFAM_INTERPOLATION_HPP

#include <span>
#include <vector>

#include "bfam/spectral.hpp"

namespace bfam {

/// Trigonometric interpolant of a periodic field, evaluated off-grid by
/// direct summation over the half spectrum (O(N) per point). Exact for
/// band-limited data; periodic in x with period 2L.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f);
  explicit TrigInterpolant(SpectralCoeffs coeffs);

  const Grid& grid() const { return coeffs_.grid; }

  double operator()(double x) const;

  std::vector<double> evaluate(std::span<const double> xs) const;

  /// Values and first derivatives at xs. The derivative drops the Nyquist
  /// mode, matching derivative(f, 1).
  void evaluate(std::span<const double> xs, std::span<double> values, std::span<double> derivs) const;

 private:
  SpectralCoeffs coeffs_;
};

}  // namespace bfam

#endif
