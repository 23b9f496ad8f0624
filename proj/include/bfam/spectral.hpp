#ifndef BFAM_SPECTRAL_HPP
#define BFAM_SPECTRAL_HPP

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "bfam/field.hpp"

namespace bfam {

/// Fourier coefficients of a real field.
///
/// Only the half spectrum k = 0..N/2 is stored; negative modes follow from
/// conjugate symmetry. Coefficients are normalized so that
///   f_j = sum_{k=-N/2}^{N/2-1} c_k exp(i xi_k (x_j - x_0)),  xi_k = pi k / L.
struct SpectralCoeffs {
  Grid grid;
  std::vector<std::complex<double>> modes;

  /// Coefficient for a signed mode index in [-N/2, N/2].
  std::complex<double> mode(int k) const;
};

namespace fft {

/// Real-to-half-complex transform with the 1/N normalization above.
/// `out` must hold N/2 + 1 entries. Thread safe.
void forward(std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of `forward`. `out` must hold N entries. Thread safe.
void inverse(std::span<const std::complex<double>> in, std::span<double> out);
/// Name and version of the FFT library in use.
std::string backend();

}  // namespace fft

SpectralCoeffs forward(const Field& f);
Field inverse(const SpectralCoeffs& c);

/// Spectral derivative of order 1, 2 or 3 (multiplier (i xi)^k). Odd orders
/// drop the Nyquist mode.
Field derivative(const Field& f, int order);

/// Multiplier 1 / (1 + xi^2): solves g - g_xx = f.
Field helmholtz_inverse(const Field& f);

/// Multiplier 1 + xi^2: f - f_xx.
Field helmholtz(const Field& f);

/// Largest retained |k| under the 2/3 rule, floor(N / 3).
int dealias_cutoff(const Grid& grid);

/// Zero every mode with |k| > dealias_cutoff.
Field dealias_truncate(const Field& f);

/// Pointwise product. With `dealias` both factors and the product are
/// truncated to the lowest 2/3 of the spectrum.
Field multiply(const Field& f, const Field& g, bool dealias);

/// sqrt(sum_k (1 + xi_k^2)^s |f_k|^2), scaled so that s = 0 gives the
/// rectangle-rule L2 norm over [-L, L).
double hs_norm(const Field& f, double s);

/// sqrt(sum_{k != 0} |xi_k|^{2s} |f_k|^2) with the same scaling as hs_norm.
double homogeneous_hs_norm(const Field& f, double s);

/// Midpoint double-quadrature of the Sobolev-Slobodeckij seminorm
///   ( iint |f(x) - f(y)|^2 / |x - y|^{1 + 2 lambda} dx dy )^{1/2}
/// over the periodic cell, with periodic distance and the diagonal dropped.
/// O(N^2); meant as an independent check of homogeneous_hs_norm.
double slobodeckij_seminorm(const Field& f, double lambda);

}  // namespace bfam

#endif
