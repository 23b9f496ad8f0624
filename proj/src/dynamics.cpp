#include "bfam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <limits>

#include "bfam/interpolation.hpp"
#include "bfam/spectral.hpp"

namespace bfam {

namespace {

using Spectrum = std::vector<std::complex<double>>;

Spectrum spectrum_of(std::span<const double> v) {
  Spectrum c(v.size() / 2 + 1);
  fft::forward(v, c);
  return c;
}

std::vector<double> from_spectrum(const Spectrum& c, int n) {
  std::vector<double> v(n);
  fft::inverse(c, v);
  return v;
}

/// Dealiased samples of v, v_x and v_xx from a single forward transform.
struct TruncatedJet {
  std::vector<double> v, vx, vxx;
};

TruncatedJet truncated_jet(const Field& f) {
  const Grid& g = f.grid();
  const int cut = dealias_cutoff(g);
  Spectrum c = spectrum_of(f.values());
  for (int k = cut + 1; k < g.n_modes(); ++k) c[k] = 0.0;
  Spectrum cx(c.size()), cxx(c.size());
  for (int k = 0; k <= cut; ++k) {
    const double xi = g.wavenumber(k);
    cx[k] = c[k] * std::complex<double>(0.0, xi);
    cxx[k] = c[k] * (-xi * xi);
  }
  return {from_spectrum(c, g.n_points), from_spectrum(cx, g.n_points), from_spectrum(cxx, g.n_points)};
}

std::vector<double> truncated(std::span<const double> v, const Grid& g) {
  Spectrum c = spectrum_of(v);
  for (int k = dealias_cutoff(g) + 1; k < g.n_modes(); ++k) c[k] = 0.0;
  return from_spectrum(c, g.n_points);
}

/// Truncate q to the 2/3 band and apply 1 / (1 + xi^2).
Field helmholtz_inverse_truncated(std::span<const double> q, const Grid& g) {
  Spectrum c = spectrum_of(q);
  const int cut = dealias_cutoff(g);
  for (int k = 0; k < g.n_modes(); ++k) {
    const double xi = g.wavenumber(k);
    c[k] = k <= cut ? c[k] / (1.0 + xi * xi) : 0.0;
  }
  return Field(g, from_spectrum(c, g.n_points));
}

/// Number of steps and the k-th step size for a fixed-dt march to T; the
/// last step is shortened when T is not a multiple of dt.
struct StepPlan {
  long long steps;
  double dt;
  double T;
  double time(long long k) const { return k == steps ? T : k * dt; }
  double size(long long k) const { return time(k + 1) - time(k); }
};

StepPlan plan_steps(const SolverConfig& c) {
  const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(c.T / c.dt - 1e-9)));
  return {n, c.dt, c.T};
}

bool is_snapshot(long long k, const StepPlan& plan, int stride) { return k % stride == 0 || k == plan.steps; }

/// A(g) = R_phi (1 - d^2) R_{phi^{-1}} g = g - (g_xx / phi_x^2 - g_x phi_xx / phi_x^3)
struct ConjugatedHelmholtz {
  const Grid& grid;
  std::vector<double> inv_phix2;
  std::vector<double> phixx_over_phix3;
  double scale = 1.0;

  ConjugatedHelmholtz(const Field& phix, const Field& phixx) : grid(phix.grid()) {
    const int n = grid.n_points;
    inv_phix2.resize(n);
    phixx_over_phix3.resize(n);
    for (int j = 0; j < n; ++j) {
      const double p = phix[j];
      inv_phix2[j] = 1.0 / (p * p);
      phixx_over_phix3[j] = phixx[j] / (p * p * p);
    }
    const auto [lo, hi] = std::minmax_element(inv_phix2.begin(), inv_phix2.end());
    scale = 0.5 * (*lo + *hi);
  }

  // (1 - scale d^2)^{-1}; scale is 1 at phi = id, so this is the flat Helmholtz
  // inverse there and keeps the fixed point contractive for strong stretching.
  std::vector<double> precondition(std::span<const double> r) const {
    Spectrum c = spectrum_of(r);
    for (int k = 0; k < grid.n_modes(); ++k) {
      const double xi = grid.wavenumber(k);
      c[k] /= 1.0 + scale * xi * xi;
    }
    return from_spectrum(c, grid.n_points);
  }

  std::vector<double> apply(std::span<const double> g) const {
    const int n = grid.n_points;
    const Spectrum c = spectrum_of(g);
    Spectrum cx(c.size()), cxx(c.size());
    for (int k = 0; k < grid.n_modes(); ++k) {
      const double xi = grid.wavenumber(k);
      cx[k] = k == n / 2 ? 0.0 : c[k] * std::complex<double>(0.0, xi);
      cxx[k] = c[k] * (-xi * xi);
    }
    const auto gx = from_spectrum(cx, n);
    const auto gxx = from_spectrum(cxx, n);
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = g[j] - (gxx[j] * inv_phix2[j] - gx[j] * phixx_over_phix3[j]);
    return out;
  }
};

double discrete_l2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

BParams::BParams(double b, double s) : b_(b), s_(s) {
  if (!std::isfinite(b)) throw std::invalid_argument("b must be finite");
  if (!(s > 1.5) || !std::isfinite(s)) throw std::invalid_argument("Sobolev index s must exceed 3/2");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive");
  if (dt > T) throw std::invalid_argument("dt must not exceed T");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot stride must be >= 1");
  if (!(blowup_norm_cap > 0.0)) throw std::invalid_argument("blow-up norm cap must be positive");
  if (!(min_phix > 0.0)) throw std::invalid_argument("min_phix must be positive");
  if (!(christoffel_tol > 0.0)) throw std::invalid_argument("christoffel tolerance must be positive");
  if (christoffel_max_iter < 1) throw std::invalid_argument("christoffel iteration cap must be >= 1");
}

double default_time_step(const Field& u0) {
  const double umax = sup_norm(u0);
  if (umax == 0.0) return 1e-3;
  return std::min(1e-3, 0.5 * u0.grid().spacing / umax);
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blowup_norm: return "blowup_norm";
    case Termination::blowup_phix: return "blowup_phix";
  }
  return "unknown";
}

Termination termination_from_string(std::string_view s) {
  if (s == "completed") return Termination::completed;
  if (s == "blowup_norm") return Termination::blowup_norm;
  if (s == "blowup_phix") return Termination::blowup_phix;
  throw std::invalid_argument("unknown termination '" + std::string(s) + "'");
}

Field rhs_eulerian(const Field& u, const BParams& params) {
  const Grid& g = u.grid();
  const int n = g.n_points;
  const double b = params.b();
  const TruncatedJet jet = truncated_jet(u);
  std::vector<double> uux(n), uxuxx(n);
  for (int j = 0; j < n; ++j) {
    uux[j] = jet.v[j] * jet.vx[j];
    uxuxx[j] = jet.vx[j] * jet.vxx[j];
  }
  const Spectrum c1 = spectrum_of(uux);
  const Spectrum c2 = spectrum_of(uxuxx);
  Spectrum out(c1.size());
  const int cut = dealias_cutoff(g);
  for (int k = 0; k <= cut; ++k) {
    const double xi = g.wavenumber(k);
    out[k] = -c1[k] + (-b * c1[k] + (b - 3.0) * c2[k]) / (1.0 + xi * xi);
  }
  return Field(g, from_spectrum(out, n));
}

EulerianTrajectory solve_eulerian(const Field& u0, const BParams& params, const SolverConfig& config) {
  config.validate();
  const StepPlan plan = plan_steps(config);
  EulerianTrajectory traj{params, config, {0.0}, {u0}, Termination::completed};

  Field u = u0;
  for (long long k = 0; k < plan.steps; ++k) {
    const double h = plan.size(k);
    const double t_next = plan.time(k + 1);
    try {
      const Field k1 = rhs_eulerian(u, params);
      const Field k2 = rhs_eulerian(u + (0.5 * h) * k1, params);
      const Field k3 = rhs_eulerian(u + (0.5 * h) * k2, params);
      const Field k4 = rhs_eulerian(u + h * k3, params);
      u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const NonFiniteValue& e) {
      throw SolverError("Eulerian solver produced a non-finite value near t = " + std::to_string(t_next) + ": " +
                            e.what(),
                        t_next);
    }
    const bool over_cap = hs_norm(u, params.s()) > config.blowup_norm_cap;
    if (is_snapshot(k + 1, plan, config.snapshot_stride) || over_cap) {
      traj.times.push_back(t_next);
      traj.states.push_back(u);
    }
    if (over_cap) {
      traj.termination = Termination::blowup_norm;
      break;
    }
  }
  return traj;
}

Field christoffel_id(const Field& v, const Field& w, const BParams& params) {
  require_same_grid(v, w);
  const Grid& g = v.grid();
  const int n = g.n_points;
  const double b = params.b();
  const TruncatedJet jv = truncated_jet(v);
  const TruncatedJet jw = truncated_jet(w);
  std::vector<double> q(n);
  for (int j = 0; j < n; ++j) {
    q[j] = -(b / 2.0) * (jv.v[j] * jw.vx[j] + jw.v[j] * jv.vx[j]) +
           ((b - 3.0) / 2.0) * (jv.vx[j] * jw.vxx[j] + jw.vx[j] * jv.vxx[j]);
  }
  return helmholtz_inverse_truncated(q, g);
}

ChristoffelResult christoffel_at_detailed(const Diffeomorphism& phi, const Field& v, const BParams& params,
                                          const ChristoffelOptions& options) {
  if (!(phi.grid() == v.grid())) throw GridMismatch();
  if (phi.is_identity()) return {christoffel_id(v, v, params), 0, false};

  const Grid& g = v.grid();
  const int n = g.n_points;
  const double b = params.b();

  const Field phix = phi.jacobian();
  const Field phixx = derivative(phi.displacement(), 2);
  const Field vx = derivative(v, 1);
  const Field vxx = derivative(v, 2);

  // delta1 = R_phi d R_phi^{-1} v, delta2 = R_phi d^2 R_phi^{-1} v
  std::vector<double> d1(n), d2(n);
  for (int j = 0; j < n; ++j) {
    const double p = phix[j];
    d1[j] = vx[j] / p;
    d2[j] = vxx[j] / (p * p) - vx[j] * phixx[j] / (p * p * p);
  }
  const auto pv = truncated(v.values(), g);
  const auto pd1 = truncated(d1, g);
  const auto pd2 = truncated(d2, g);
  std::vector<double> q(n);
  for (int j = 0; j < n; ++j) q[j] = -b * pv[j] * pd1[j] + (b - 3.0) * pd1[j] * pd2[j];
  const std::vector<double> rhs = truncated(q, g);

  const double rhs_norm = discrete_l2(rhs);
  if (rhs_norm == 0.0) return {Field::zeros(g), 0, false};

  const ConjugatedHelmholtz op(phix, phixx);
  std::vector<double> sol;
  if (options.initial_guess != nullptr) {
    require_same_grid(*options.initial_guess, v);
    const auto guess = options.initial_guess->values();
    sol.assign(guess.begin(), guess.end());
  } else {
    sol = op.precondition(rhs);
  }

  // Preconditioned fixed point g <- g + P^{-1}(rhs - A g).
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it <= options.max_iterations; ++it) {
    const std::vector<double> ag = op.apply(sol);
    std::vector<double> r(n);
    for (int j = 0; j < n; ++j) r[j] = rhs[j] - ag[j];
    const double rn = discrete_l2(r);
    if (rn <= options.tolerance * rhs_norm) return {Field(g, std::move(sol)), it, false};
    if (rn < best) {
      best = rn;
      since_best = 0;
    } else if (++since_best >= 10) {
      break;
    }
    if (it == options.max_iterations) break;
    const std::vector<double> correction = op.precondition(r);
    for (int j = 0; j < n; ++j) sol[j] += correction[j];
  }

  if (!options.allow_fallback)
    throw ConvergenceError("conjugated Helmholtz iteration did not reach tolerance " +
                           std::to_string(options.tolerance) + " (residual ratio " +
                           std::to_string(best / rhs_norm) + ")");
  try {
    return {christoffel_at_literal(phi, v, params), options.max_iterations, true};
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("conjugated Helmholtz iteration stalled and the explicit pipeline failed: ") +
                           e.what());
  }
}

Field christoffel_at(const Diffeomorphism& phi, const Field& v, const BParams& params,
                     const ChristoffelOptions& options) {
  return christoffel_at_detailed(phi, v, params, options).value;
}

Field christoffel_at_literal(const Diffeomorphism& phi, const Field& v, const BParams& params) {
  const Field w = compose_field(v, invert(phi));
  return compose_field(christoffel_id(w, w, params), phi);
}

LagrangianTrajectory solve_geodesic(const Field& u0, const BParams& params, const SolverConfig& config) {
  config.validate();
  const StepPlan plan = plan_steps(config);
  const Grid& g = u0.grid();
  LagrangianTrajectory traj{params, config, {0.0}, {SprayState{Diffeomorphism::identity(g), u0}},
                            Termination::completed};

  ChristoffelOptions opts;
  opts.tolerance = config.christoffel_tol;
  opts.max_iterations = config.christoffel_max_iter;

  // The previous stage's Gamma warm-starts the next solve.
  Field last_gamma = Field::zeros(g);
  auto gamma = [&](const Diffeomorphism& phi, const Field& v) {
    opts.initial_guess = phi.is_identity() ? nullptr : &last_gamma;
    last_gamma = christoffel_at(phi, v, params, opts);
    return last_gamma;
  };

  Field f = Field::zeros(g);
  Field p = u0;
  Diffeomorphism phi = Diffeomorphism::identity(g);
  for (long long k = 0; k < plan.steps; ++k) {
    const double h = plan.size(k);
    const double t_next = plan.time(k + 1);
    Termination stop = Termination::completed;
    try {
      const Field k1f = p;
      const Field k1p = gamma(phi, p);
      const Field k2f = p + (0.5 * h) * k1p;
      const Field k2p = gamma(Diffeomorphism(f + (0.5 * h) * k1f), k2f);
      const Field k3f = p + (0.5 * h) * k2p;
      const Field k3p = gamma(Diffeomorphism(f + (0.5 * h) * k2f), k3f);
      const Field k4f = p + h * k3p;
      const Field k4p = gamma(Diffeomorphism(f + h * k3f), k4f);
      f += (h / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
      p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      phi = Diffeomorphism(f);
      if (phi.min_jacobian() < config.min_phix)
        stop = Termination::blowup_phix;
      else if (hs_norm(p, params.s()) > config.blowup_norm_cap)
        stop = Termination::blowup_norm;
    } catch (const NotADiffeomorphism&) {
      traj.termination = Termination::blowup_phix;
      break;
    } catch (const NonFiniteValue& e) {
      throw SolverError("geodesic solver produced a non-finite value near t = " + std::to_string(t_next) + ": " +
                            e.what(),
                        t_next);
    }
    if (is_snapshot(k + 1, plan, config.snapshot_stride) || stop != Termination::completed) {
      traj.times.push_back(t_next);
      traj.states.push_back(SprayState{phi, p});
    }
    if (stop != Termination::completed) {
      traj.termination = stop;
      break;
    }
  }
  return traj;
}

Diffeomorphism exp_map(const Field& v, const BParams& params, const SolverConfig& config) {
  SolverConfig c = config;
  c.T = 1.0;
  c.snapshot_stride = std::numeric_limits<int>::max();
  const LagrangianTrajectory traj = solve_geodesic(v, params, c);
  if (!traj.completed())
    throw OutsideDomain("v outside the exp domain: geodesic terminated (" + std::string(to_string(traj.termination)) +
                            ") at t = " + std::to_string(traj.times.back()),
                        traj.termination);
  return traj.final_state().phi;
}

Field dexp(const Field& u0, const Field& v, const BParams& params, double eps, const SolverConfig& config) {
  if (!(eps > 0.0)) throw std::invalid_argument("dexp step must be positive");
  require_same_grid(u0, v);
  auto plus = std::async(std::launch::async, [&] { return exp_map(u0 + eps * v, params, config); });
  const Diffeomorphism minus = exp_map(u0 - eps * v, params, config);
  const Diffeomorphism up = plus.get();
  return (up.displacement() - minus.displacement()) * (1.0 / (2.0 * eps));
}

LagrangianTrajectory flow_from_velocity(const EulerianTrajectory& traj) {
  if (traj.config.snapshot_stride != 1)
    throw std::invalid_argument("flow_from_velocity needs every time step (snapshot stride 1)");
  const Grid& g = traj.states.front().grid();
  const int n = g.n_points;
  LagrangianTrajectory out{traj.params, traj.config, {traj.times.front()},
                           {SprayState{Diffeomorphism::identity(g), traj.states.front()}}, traj.termination};

  auto positions = [&](const Field& f, const std::vector<double>* incr, double scale) {
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = g.x(j) + f[j] + (incr ? scale * (*incr)[j] : 0.0);
    return x;
  };

  Field f = Field::zeros(g);
  SpectralCoeffs now = forward(traj.states.front());
  std::vector<double> k1;
  k1.assign(traj.states.front().values().begin(), traj.states.front().values().end());
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const double h = traj.times[k + 1] - traj.times[k];
    SpectralCoeffs next = forward(traj.states[k + 1]);
    SpectralCoeffs mid = now;
    for (std::size_t m = 0; m < mid.modes.size(); ++m) mid.modes[m] = 0.5 * (now.modes[m] + next.modes[m]);
    const TrigInterpolant u_mid(mid);
    const TrigInterpolant u_next(next);

    const std::vector<double> k2 = u_mid.evaluate(positions(f, &k1, 0.5 * h));
    const std::vector<double> k3 = u_mid.evaluate(positions(f, &k2, 0.5 * h));
    const std::vector<double> k4 = u_next.evaluate(positions(f, &k3, h));
    std::vector<double> fn(n);
    for (int j = 0; j < n; ++j) fn[j] = f[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    f = Field(g, std::move(fn));
    Diffeomorphism phi(f);

    k1 = u_next.evaluate(positions(f, nullptr, 0.0));
    out.times.push_back(traj.times[k + 1]);
    out.states.push_back(SprayState{std::move(phi), Field(g, k1)});
    now = std::move(next);
  }
  return out;
}

Field eulerian_from_lagrangian(const SprayState& state) { return compose_field(state.phit, invert(state.phi)); }

}  // namespace bfam
