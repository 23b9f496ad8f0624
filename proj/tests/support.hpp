// Shared fixtures and independent oracles for the test binaries.
#ifndef BFAM_TESTS_SUPPORT_HPP
#define BFAM_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bfam/diffeo.hpp"
#include "bfam/field.hpp"
#include "bfam/spectral.hpp"

namespace testing {

using namespace bfam;

inline Field gaussian(const Grid& g, double amp, double width, double center = 0.0) {
  return Field::sample(g, [=](double x) {
    const double t = (x - center) / width;
    return amp * std::exp(-t * t);
  });
}

/// Smooth periodic field with random coefficients on the first `modes`
/// wavenumbers, decaying like 1/k^2 and scaled to sup norm `amp`.
inline Field random_smooth(const Grid& g, std::mt19937_64& rng, double amp, int modes = 6) {
  std::normal_distribution<double> normal;
  std::vector<double> a(modes + 1), b(modes + 1);
  for (int k = 1; k <= modes; ++k) {
    a[k] = normal(rng) / (k * k);
    b[k] = normal(rng) / (k * k);
  }
  Field f = Field::sample(g, [&](double x) {
    double acc = 0.0;
    for (int k = 1; k <= modes; ++k) acc += a[k] * std::cos(g.wavenumber(k) * x) + b[k] * std::sin(g.wavenumber(k) * x);
    return acc;
  });
  return f * (amp / sup_norm(f));
}

/// Displacement with |f_x| <= slope, built from random_smooth.
inline Diffeomorphism random_diffeo(const Grid& g, std::mt19937_64& rng, double slope, int modes = 6) {
  Field f = random_smooth(g, rng, 1.0, modes);
  const double fx = sup_norm(derivative(f, 1));
  return Diffeomorphism(f * (slope / fx));
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Second-order centred differences.
inline Field fd_first(const Field& f) {
  const int n = f.size();
  const double h = f.grid().spacing;
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) / (2 * h);
  return Field(f.grid(), out);
}

inline Field fd_second(const Field& f) {
  const int n = f.size();
  const double h = f.grid().spacing;
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = (f[(j + 1) % n] - 2 * f[j] + f[(j + n - 1) % n]) / (h * h);
  return Field(f.grid(), out);
}

/// (1 - d^2)^{-1} exp(-y^2) at x, by direct quadrature against the periodic
/// Green's function K(z) = cosh(z - L) / (2 sinh L), z = y - x in [0, 2L).
/// K has a derivative jump at z = 0, so the trapezoid sum is corrected with
/// the Euler-Maclaurin endpoint terms up to h^6 using analytic derivatives.
inline double helmholtz_gaussian_quadrature(double x, double L, int m) {
  const double h = 2 * L / m;
  auto f = [&](double y) {
    y = std::remainder(y, 2 * L);
    return std::exp(-y * y);
  };
  auto kernel = [&](double z) { return std::cosh(z - L) / (2 * std::sinh(L)); };
  double sum = 0.5 * (kernel(0.0) * f(x) + kernel(2 * L) * f(x + 2 * L));
  for (int i = 1; i < m; ++i) sum += kernel(i * h) * f(x + i * h);
  sum *= h;
  const double xr = std::remainder(x, 2 * L);
  const double f0 = f(xr);
  const double f2 = (4 * xr * xr - 2) * f0;
  const double f4 = (16 * std::pow(xr, 4) - 48 * xr * xr + 12) * f0;
  const double h2 = h * h, h4 = h2 * h2, h6 = h4 * h2;
  return sum - h2 / 12 * f0 + h4 / 720 * (f0 + 3 * f2) - h6 / 30240 * (f0 + 10 * f2 + 5 * f4);
}

/// Explicit pipeline for R_phi d^k R_{phi^{-1}} f.
inline Field conjugated_derivative_literal(const Diffeomorphism& phi, const Field& f, int k) {
  return compose_field(derivative(compose_field(f, invert(phi)), k), phi);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing

#endif
