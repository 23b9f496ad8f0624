#include "bfam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "bfam/diagnostics.hpp"
#include "bfam/spectral.hpp"

namespace bfam {

namespace {

SolverConfig final_only(SolverConfig c, double T) {
  c.T = T;
  c.snapshot_stride = std::numeric_limits<int>::max();
  return c;
}

Field run_to(const Field& u0, const BParams& params, const SolverConfig& config, double T) {
  const EulerianTrajectory traj = solve_eulerian(u0, params, final_only(config, T));
  if (!traj.completed())
    throw OutsideDomain("initial datum outside U: solution terminated (" + std::string(to_string(traj.termination)) +
                            ") at t = " + std::to_string(traj.times.back()),
                        traj.termination);
  return traj.final_state();
}

}  // namespace

Field build_bump(double center, double radius, double s, double target_norm, const Grid& grid) {
  if (!(radius > 4.0 * grid.spacing))
    throw std::invalid_argument("bump radius " + std::to_string(radius) + " is not resolved (needs > 4h = " +
                                std::to_string(4.0 * grid.spacing) + ")");
  if (std::abs(center) + radius > 0.75 * grid.half_length)
    throw std::invalid_argument("bump support leaves the safe region |x| <= 3L/4");
  if (target_norm < 0.0) throw std::invalid_argument("target norm must be nonnegative");
  if (target_norm == 0.0) return Field::zeros(grid);

  const Field profile = Field::sample(grid, [&](double x) {
    const double t = (x - center) / radius;
    return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
  });
  const double norm = hs_norm(profile, s);
  return profile * (target_norm / norm);
}

ProbeGeometry estimate_probe_geometry(const NonUniformityConfig& cfg) {
  const double s = cfg.params.s();
  const double vnorm = hs_norm(cfg.v, s);
  if (vnorm == 0.0) throw DegenerateProbe("probe direction v is zero");

  auto base = std::async(std::launch::async, [&] { return exp_map(cfg.u0, cfg.params, cfg.solver); });
  Field d = dexp(cfg.u0, cfg.v, cfg.params, cfg.eps_dexp, cfg.solver);
  const Diffeomorphism phi = base.get();

  const auto vals = d.values();
  const auto it = std::max_element(vals.begin(), vals.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  const int idx = static_cast<int>(it - vals.begin());
  const double m = std::abs(*it) / vnorm;
  if (!(m >= 1e-12)) throw DegenerateProbe("d exp(v) vanishes: m_est = " + std::to_string(m));

  const Field jac = phi.jacobian();
  const double lip = *std::max_element(jac.values().begin(), jac.values().end());
  return ProbeGeometry{d.grid().x(idx), idx, m, 1.5 * lip, std::move(d)};
}

std::vector<ExperimentRow> ExperimentReport::resolved() const {
  std::vector<ExperimentRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [](const ExperimentRow& r) { return r.resolved_ok; });
  return out;
}

bool ExperimentReport::witness_bound_holds() const {
  const auto rs = resolved();
  return !rs.empty() && std::all_of(rs.begin(), rs.end(), [&](const ExperimentRow& r) {
    return r.witness_gap >= m_est * v_norm / (2.0 * r.n);
  });
}

bool ExperimentReport::separation_persists() const {
  auto rs = resolved();
  if (rs.empty()) return false;
  std::sort(rs.begin(), rs.end(), [](const ExperimentRow& a, const ExperimentRow& b) { return a.n < b.n; });
  const double first = rs.front().output_distance;
  return first > 0.0 &&
         std::all_of(rs.begin(), rs.end(), [&](const ExperimentRow& r) { return r.output_distance >= 0.1 * first; });
}

bool ExperimentReport::disjoint_holds() const {
  const auto rs = resolved();
  return !rs.empty() && std::all_of(rs.begin(), rs.end(), [](const ExperimentRow& r) { return r.disjoint_ok; });
}

ExperimentReport nonuniformity_experiment(const NonUniformityConfig& cfg) {
  const Grid& grid = cfg.u0.grid();
  require_same_grid(cfg.u0, cfg.v);
  if (!(cfg.R > 0.0)) throw std::invalid_argument("ball radius R must be positive");
  for (int n : cfg.n_values)
    if (n < 1) throw std::invalid_argument("n values must be >= 1");

  const double s = cfg.params.s();
  const double b = cfg.params.b();
  const ProbeGeometry geo = estimate_probe_geometry(cfg);

  ExperimentReport report;
  report.m_est = geo.m_est;
  report.x0_est = geo.x0_est;
  report.L_est = geo.L_est;
  report.v_norm = hs_norm(cfg.v, s);

  auto evaluate = [&](int n) {
    ExperimentRow row;
    row.n = n;
    row.r_n = geo.m_est * report.v_norm / (8.0 * n);
    row.bump_radius = row.r_n / geo.L_est;
    row.resolved_ok = row.bump_radius > 4.0 * grid.spacing;
    const Field vn = cfg.v * (1.0 / n);
    row.input_distance = hs_norm(vn, s);
    if (!row.resolved_ok) {
      row.output_distance = row.momentum_output_distance = row.witness_gap = std::numeric_limits<double>::quiet_NaN();
      return row;
    }
    const Field w = build_bump(geo.x0_est, row.bump_radius, s, cfg.R / 4.0, grid);
    const Field x = cfg.u0 + w;
    const Field xt = x + vn;
    row.input_distance = hs_norm(xt - x, s);

    auto guarded = [&](auto&& fn, bool tilde) {
      try {
        return fn();
      } catch (const OutsideDomain& e) {
        throw ExperimentBlowup("n = " + std::to_string(n) + (tilde ? " (tilde sequence): " : ": ") + e.what(), n,
                               tilde);
      }
    };
    const Field out = guarded([&] { return run_to(x, cfg.params, cfg.solver, 1.0); }, false);
    const Field out_t = guarded([&] { return run_to(xt, cfg.params, cfg.solver, 1.0); }, true);
    const Diffeomorphism phi = guarded([&] { return exp_map(x, cfg.params, cfg.solver); }, false);
    const Diffeomorphism phi_t = guarded([&] { return exp_map(xt, cfg.params, cfg.solver); }, true);

    row.output_distance = hs_norm(out - out_t, s);
    const Field y1 = pushforward_reconstruct(momentum(x), phi, b);
    const Field y1_t = pushforward_reconstruct(momentum(xt), phi_t, b);
    row.momentum_output_distance = hs_norm(y1 - y1_t, s - 2.0);
    row.witness_gap = std::abs(phi.at(geo.x0_index) - phi_t.at(geo.x0_index));
    row.disjoint_ok = row.r_n <= row.witness_gap / 4.0;
    return row;
  };

  std::vector<std::future<ExperimentRow>> jobs;
  for (int n : cfg.n_values) jobs.push_back(std::async(std::launch::async, evaluate, n));
  for (auto& j : jobs) report.rows.push_back(j.get());
  return report;
}

double scaling_check(const Field& u0, double lambda, double T, const BParams& params, const SolverConfig& config) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaling factor must be positive");
  const Field u = run_to(u0, params, config, T);
  SolverConfig scaled = config;
  scaled.dt = config.dt / lambda;
  const Field v = run_to(lambda * u0, params, scaled, T / lambda);
  return hs_norm(v - lambda * u, params.s());
}

Field time_one_map(const Field& u0, const BParams& params, const SolverConfig& config) {
  return run_to(u0, params, config, 1.0);
}

}  // namespace bfam
