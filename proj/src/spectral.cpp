#include "bfam/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace bfam {

namespace {

// The FFTW planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  explicit Plan(int n) : n_(n) {
    real_ = fftw_alloc_real(n);
    cplx_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    r2c_ = fftw_plan_dft_r2c_1d(n, real_, cplx_, FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_1d(n, cplx_, real_, FFTW_ESTIMATE);
  }
  ~Plan() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(c2r_);
      fftw_destroy_plan(r2c_);
    }
    fftw_free(cplx_);
    fftw_free(real_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(r2c_);
    const double scale = 1.0 / n_;
    for (int k = 0; k <= n_ / 2; ++k) out[k] = {cplx_[k][0] * scale, cplx_[k][1] * scale};
  }

  void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    for (int k = 0; k <= n_ / 2; ++k) {
      cplx_[k][0] = in[k].real();
      cplx_[k][1] = in[k].imag();
    }
    // A real signal has real DC and Nyquist coefficients.
    cplx_[0][1] = 0.0;
    cplx_[n_ / 2][1] = 0.0;
    fftw_execute(c2r_);
    std::copy(real_, real_ + n_, out.begin());
  }

 private:
  int n_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan r2c_;
  fftw_plan c2r_;
};

Plan& plan_for(int n) {
  thread_local std::map<int, std::unique_ptr<Plan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& m) {
  const Grid& g = f.grid();
  std::vector<std::complex<double>> c(g.n_modes());
  fft::forward(f.values(), c);
  for (int k = 0; k < g.n_modes(); ++k) c[k] *= m(k);
  std::vector<double> out(g.n_points);
  fft::inverse(c, out);
  return Field(g, std::move(out));
}

double mode_weight(const Grid& g, int k) { return (k == 0 || k == g.n_points / 2) ? 1.0 : 2.0; }

}  // namespace

namespace fft {

void forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  if (static_cast<int>(out.size()) < n / 2 + 1) throw std::invalid_argument("fft::forward: output too small");
  plan_for(n).forward(in, out);
}

void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (static_cast<int>(in.size()) < n / 2 + 1) throw std::invalid_argument("fft::inverse: input too small");
  plan_for(n).inverse(in, out);
}

std::string backend() { return fftw_version; }

}  // namespace fft

std::complex<double> SpectralCoeffs::mode(int k) const {
  const int n = grid.n_points;
  if (k < -n / 2 || k > n / 2) throw std::out_of_range("mode index " + std::to_string(k));
  return k >= 0 ? modes[k] : std::conj(modes[-k]);
}

SpectralCoeffs forward(const Field& f) {
  SpectralCoeffs c{f.grid(), std::vector<std::complex<double>>(f.grid().n_modes())};
  fft::forward(f.values(), c.modes);
  return c;
}

Field inverse(const SpectralCoeffs& c) {
  std::vector<double> out(c.grid.n_points);
  fft::inverse(c.modes, out);
  return Field(c.grid, std::move(out));
}

Field derivative(const Field& f, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
  const Grid& g = f.grid();
  const int nyquist = g.n_points / 2;
  return apply_multiplier(f, [&](int k) -> std::complex<double> {
    if (k == nyquist && order % 2 == 1) return 0.0;
    const double xi = g.wavenumber(k);
    switch (order) {
      case 1: return {0.0, xi};
      case 2: return -xi * xi;
      default: return {0.0, -xi * xi * xi};
    }
  });
}

Field helmholtz_inverse(const Field& f) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](int k) {
    const double xi = g.wavenumber(k);
    return std::complex<double>(1.0 / (1.0 + xi * xi));
  });
}

Field helmholtz(const Field& f) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](int k) {
    const double xi = g.wavenumber(k);
    return std::complex<double>(1.0 + xi * xi);
  });
}

int dealias_cutoff(const Grid& grid) { return grid.n_points / 3; }

Field dealias_truncate(const Field& f) {
  const int cut = dealias_cutoff(f.grid());
  return apply_multiplier(f, [&](int k) { return std::complex<double>(k <= cut ? 1.0 : 0.0); });
}

Field multiply(const Field& f, const Field& g, bool dealias) {
  require_same_grid(f, g);
  const int n = f.size();
  std::vector<double> out(n);
  if (!dealias) {
    for (int j = 0; j < n; ++j) out[j] = f[j] * g[j];
    return Field(f.grid(), std::move(out));
  }
  const Field pf = dealias_truncate(f);
  const Field pg = dealias_truncate(g);
  for (int j = 0; j < n; ++j) out[j] = pf[j] * pg[j];
  return dealias_truncate(Field(f.grid(), std::move(out)));
}

double hs_norm(const Field& f, double s) {
  const Grid& g = f.grid();
  const SpectralCoeffs c = forward(f);
  double acc = 0.0;
  for (int k = 0; k < g.n_modes(); ++k) {
    const double xi = g.wavenumber(k);
    acc += mode_weight(g, k) * std::pow(1.0 + xi * xi, s) * std::norm(c.modes[k]);
  }
  return std::sqrt(g.period() * acc);
}

double homogeneous_hs_norm(const Field& f, double s) {
  const Grid& g = f.grid();
  const SpectralCoeffs c = forward(f);
  double acc = 0.0;
  for (int k = 1; k < g.n_modes(); ++k) {
    const double xi = g.wavenumber(k);
    acc += mode_weight(g, k) * std::pow(xi, 2.0 * s) * std::norm(c.modes[k]);
  }
  return std::sqrt(g.period() * acc);
}

double slobodeckij_seminorm(const Field& f, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("Slobodeckij order must lie in (0, 1)");
  const Grid& g = f.grid();
  const int n = g.n_points;
  // Kernel depends only on the index offset m = (i - j) mod N.
  std::vector<double> kernel(n, 0.0);
  for (int m = 1; m < n; ++m) {
    const double d = std::min(m, n - m) * g.spacing;
    kernel[m] = std::pow(d, -1.0 - 2.0 * lambda);
  }
  const auto v = f.values();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int m = 1; m < n; ++m) {
      const int j = i + m < n ? i + m : i + m - n;
      const double d = v[i] - v[j];
      row += d * d * kernel[m];
    }
    acc += row;
  }
  return std::sqrt(g.spacing * g.spacing * acc);
}

}  // namespace bfam
