#include "bfam/interpolation.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace bfam {

namespace {

constexpr int kBlock = 64;
// Powers of exp(i theta) are re-seeded from cos/sin at this stride so the
// recurrence error stays at a few ulps.
constexpr int kReseed = 32;

template <bool WithDerivative>
void sum_block(const SpectralCoeffs& c, const double* xs, int count, double* values, double* derivs) {
  const Grid& g = c.grid;
  const int half = g.n_points / 2;
  const double scale = std::numbers::pi / g.half_length;

  std::array<double, kBlock> theta{}, zr{}, zi{}, pr{}, pi{}, acc{}, dacc{};
  for (int p = 0; p < count; ++p) {
    theta[p] = scale * (xs[p] + g.half_length);
    zr[p] = std::cos(theta[p]);
    zi[p] = std::sin(theta[p]);
    pr[p] = 1.0;
    pi[p] = 0.0;
  }

  for (int k = 0; k <= half; ++k) {
    if (k % kReseed == 0 && k > 0) {
      for (int p = 0; p < count; ++p) {
        pr[p] = std::cos(k * theta[p]);
        pi[p] = std::sin(k * theta[p]);
      }
    }
    const double w = (k == 0 || k == half) ? 1.0 : 2.0;
    const double cr = w * c.modes[k].real();
    const double ci = w * c.modes[k].imag();
    for (int p = 0; p < count; ++p) acc[p] += cr * pr[p] - ci * pi[p];
    if constexpr (WithDerivative) {
      if (k != half) {
        const double kk = k * scale;
        for (int p = 0; p < count; ++p) dacc[p] -= kk * (cr * pi[p] + ci * pr[p]);
      }
    }
    for (int p = 0; p < count; ++p) {
      const double nr = pr[p] * zr[p] - pi[p] * zi[p];
      const double ni = pr[p] * zi[p] + pi[p] * zr[p];
      pr[p] = nr;
      pi[p] = ni;
    }
  }
  for (int p = 0; p < count; ++p) {
    values[p] = acc[p];
    if constexpr (WithDerivative) derivs[p] = dacc[p];
  }
}

}  // namespace

TrigInterpolant::TrigInterpolant(const Field& f) : coeffs_(forward(f)) {}

TrigInterpolant::TrigInterpolant(SpectralCoeffs coeffs) : coeffs_(std::move(coeffs)) {
  if (static_cast<int>(coeffs_.modes.size()) != coeffs_.grid.n_modes())
    throw std::invalid_argument("coefficient count does not match grid");
}

double TrigInterpolant::operator()(double x) const {
  double v = 0.0;
  sum_block<false>(coeffs_, &x, 1, &v, nullptr);
  return v;
}

std::vector<double> TrigInterpolant::evaluate(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t start = 0; start < xs.size(); start += kBlock) {
    const int count = static_cast<int>(std::min<std::size_t>(kBlock, xs.size() - start));
    sum_block<false>(coeffs_, xs.data() + start, count, out.data() + start, nullptr);
  }
  return out;
}

void TrigInterpolant::evaluate(std::span<const double> xs, std::span<double> values,
                               std::span<double> derivs) const {
  if (values.size() < xs.size() || derivs.size() < xs.size())
    throw std::invalid_argument("output spans too small");
  for (std::size_t start = 0; start < xs.size(); start += kBlock) {
    const int count = static_cast<int>(std::min<std::size_t>(kBlock, xs.size() - start));
    sum_block<true>(coeffs_, xs.data() + start, count, values.data() + start, derivs.data() + start);
  }
}

}  // namespace bfam
