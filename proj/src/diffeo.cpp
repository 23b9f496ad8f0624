#include "bfam/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bfam/interpolation.hpp"
#include "bfam/spectral.hpp"

namespace bfam {

NotADiffeomorphism::NotADiffeomorphism(double min_jacobian, int index)
    : std::domain_error("phi_x = " + std::to_string(min_jacobian) + " <= 0 at grid index " +
                        std::to_string(index)),
      min_jacobian_(min_jacobian),
      index_(index) {}

Diffeomorphism::Diffeomorphism(Field displacement)
    : displacement_(std::move(displacement)), min_jacobian_(std::numeric_limits<double>::infinity()) {
  const Field fx = derivative(displacement_, 1);
  int worst = 0;
  for (int j = 0; j < fx.size(); ++j) {
    if (1.0 + fx[j] < min_jacobian_) {
      min_jacobian_ = 1.0 + fx[j];
      worst = j;
    }
  }
  if (!(min_jacobian_ > 0.0)) throw NotADiffeomorphism(min_jacobian_, worst);
}

Diffeomorphism Diffeomorphism::identity(const Grid& grid) { return Diffeomorphism(Field::zeros(grid)); }

Field Diffeomorphism::jacobian() const { return Field::constant(grid(), 1.0) + derivative(displacement_, 1); }

bool Diffeomorphism::is_identity() const {
  return std::all_of(displacement_.values().begin(), displacement_.values().end(),
                     [](double v) { return v == 0.0; });
}

std::optional<double> Diffeomorphism::constant_shift() const {
  const double c = displacement_[0];
  for (double v : displacement_.values())
    if (v != c) return std::nullopt;
  return c;
}

Field compose_field(const Field& g, const Diffeomorphism& phi) {
  if (!(g.grid() == phi.grid())) throw GridMismatch();
  const Grid& grid = g.grid();
  const int n = grid.n_points;

  if (const auto shift = phi.constant_shift()) {
    if (*shift == 0.0) return g;
    const double m = *shift / grid.spacing;
    const double rounded = std::round(m);
    if (std::abs(m - rounded) <= 1e-12 * std::max(1.0, std::abs(m))) {
      const long long offset = static_cast<long long>(rounded);
      const int r = static_cast<int>(((offset % n) + n) % n);
      std::vector<double> out(n);
      for (int j = 0; j < n; ++j) out[j] = g[(j + r) % n];
      return Field(grid, std::move(out));
    }
  }

  std::vector<double> positions(n);
  for (int j = 0; j < n; ++j) positions[j] = phi.at(j);
  return Field(grid, TrigInterpolant(g).evaluate(positions));
}

Diffeomorphism compose_diffeo(const Diffeomorphism& phi, const Diffeomorphism& psi) {
  if (!(phi.grid() == psi.grid())) throw GridMismatch();
  return Diffeomorphism(psi.displacement() + compose_field(phi.displacement(), psi));
}

Diffeomorphism invert(const Diffeomorphism& phi, const InversionOptions& options) {
  const Grid& grid = phi.grid();
  const int n = grid.n_points;

  if (phi.min_jacobian() < options.min_margin) {
    const Field jac = phi.jacobian();
    const auto worst = std::min_element(jac.values().begin(), jac.values().end()) - jac.values().begin();
    throw InversionFailure("phi_x = " + std::to_string(phi.min_jacobian()) + " below inversion margin " +
                               std::to_string(options.min_margin),
                           static_cast<int>(worst));
  }
  if (const auto shift = phi.constant_shift()) {
    if (*shift == 0.0) return phi;
    return Diffeomorphism(Field::constant(grid, -*shift));
  }

  const Field& f = phi.displacement();
  const TrigInterpolant interp(f);
  const auto [fmin_it, fmax_it] = std::minmax_element(f.values().begin(), f.values().end());
  const double fmin = *fmin_it;
  const double fmax = *fmax_it;

  // phi(y) - x_j is increasing in y; the root lies in [x_j - max f, x_j - min f]
  // up to the overshoot of the interpolant between grid points.
  std::vector<double> lo(n), hi(n), y(n);
  std::vector<int> active(n);
  double pad = 0.25 * (fmax - fmin) + grid.spacing;
  for (int attempt = 0;; ++attempt) {
    std::vector<double> xs(2 * n);
    for (int j = 0; j < n; ++j) {
      lo[j] = grid.x(j) - fmax - pad;
      hi[j] = grid.x(j) - fmin + pad;
      xs[j] = lo[j];
      xs[n + j] = hi[j];
    }
    const std::vector<double> fv = interp.evaluate(xs);
    int bad = -1;
    for (int j = 0; j < n && bad < 0; ++j)
      if (lo[j] + fv[j] - grid.x(j) > 0.0 || hi[j] + fv[n + j] - grid.x(j) < 0.0) bad = j;
    if (bad < 0) break;
    if (attempt == 8) throw InversionFailure("could not bracket phi(y) = x_j", bad);
    pad *= 4.0;
  }

  for (int j = 0; j < n; ++j) {
    y[j] = std::clamp(grid.x(j) - f[j], lo[j], hi[j]);
    active[j] = j;
  }

  std::vector<double> pts, vals, ders;
  for (int iter = 0; iter < options.max_iterations && !active.empty(); ++iter) {
    const std::size_t m = active.size();
    pts.resize(m);
    vals.resize(m);
    ders.resize(m);
    for (std::size_t a = 0; a < m; ++a) pts[a] = y[active[a]];
    interp.evaluate(pts, vals, ders);

    std::vector<int> still;
    still.reserve(m);
    for (std::size_t a = 0; a < m; ++a) {
      const int j = active[a];
      const double residual = y[j] + vals[a] - grid.x(j);
      const double slope = 1.0 + ders[a];
      if (residual == 0.0) continue;
      if (residual < 0.0)
        lo[j] = y[j];
      else
        hi[j] = y[j];
      double next = slope > 0.0 ? y[j] - residual / slope : 0.5 * (lo[j] + hi[j]);
      if (!(next > lo[j] && next < hi[j])) next = 0.5 * (lo[j] + hi[j]);
      const double step = next - y[j];
      y[j] = next;
      if (std::abs(step) <= options.tolerance || hi[j] - lo[j] <= options.tolerance) continue;
      still.push_back(j);
    }
    active.swap(still);
  }
  if (!active.empty())
    throw InversionFailure("Newton iteration did not converge in " + std::to_string(options.max_iterations) +
                               " iterations",
                           active.front());

  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = y[j] - grid.x(j);
  return Diffeomorphism(Field(grid, std::move(g)));
}

Field conjugated_derivative(const Diffeomorphism& phi, const Field& f, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("conjugated derivative order must be 1 or 2");
  if (!(f.grid() == phi.grid())) throw GridMismatch();
  const int n = f.size();
  const Field phix = phi.jacobian();
  const Field fx = derivative(f, 1);
  std::vector<double> out(n);
  if (order == 1) {
    for (int j = 0; j < n; ++j) out[j] = fx[j] / phix[j];
  } else {
    const Field fxx = derivative(f, 2);
    const Field phixx = derivative(phi.displacement(), 2);
    for (int j = 0; j < n; ++j) {
      const double p = phix[j];
      out[j] = fxx[j] / (p * p) - fx[j] * phixx[j] / (p * p * p);
    }
  }
  return Field(f.grid(), std::move(out));
}

}  // namespace bfam
