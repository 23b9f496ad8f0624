#ifndef BFAM_EXPERIMENTS_HPP
#define BFAM_EXPERIMENTS_HPP

#include <vector>

#include "bfam/dynamics.hpp"

namespace bfam {

/// Mollifier exp(-1 / (1 - ((x - c)/radius)^2)) on |x - c| < radius, zero
/// elsewhere, scaled so that hs_norm(result, s) == target_norm.
/// Throws std::invalid_argument when radius <= 4h or the support leaves the
/// safe region |x| <= 3L/4.
Field build_bump(double center, double radius, double s, double target_norm, const Grid& grid);

struct NonUniformityConfig {
  Field u0;
  Field v;
  BParams params;
  double R = 0.5;
  std::vector<int> n_values{1, 2, 4, 8, 16};
  SolverConfig solver{};
  double eps_dexp = 1e-3;
};

struct ProbeGeometry {
  double x0_est = 0.0;
  int x0_index = 0;
  double m_est = 0.0;
  double L_est = 0.0;
  Field dexp_v;
};

/// Thrown when the probe direction gives a vanishing d exp.
class DegenerateProbe : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// x0 = argmax |d_{u0} exp(v)|, m = |d_{u0} exp(v)(x0)| / |v|_s,
/// L = 1.5 max phi_x for phi = exp(u0).
ProbeGeometry estimate_probe_geometry(const NonUniformityConfig& cfg);

struct ExperimentRow {
  int n = 0;
  double r_n = 0.0;
  double bump_radius = 0.0;
  double input_distance = 0.0;
  double output_distance = 0.0;
  double momentum_output_distance = 0.0;
  double witness_gap = 0.0;
  bool disjoint_ok = false;
  bool resolved_ok = false;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  double m_est = 0.0;
  double x0_est = 0.0;
  double L_est = 0.0;
  double v_norm = 0.0;

  /// Rows with a resolvable bump radius (>= 4h).
  std::vector<ExperimentRow> resolved() const;
  /// witness_gap >= m |v|_s / (2n) on every resolved row.
  bool witness_bound_holds() const;
  /// Resolved output distances stay >= 0.1 x the value at the smallest resolved n.
  bool separation_persists() const;
  bool disjoint_holds() const;
};

/// Thrown when a constructed initial datum leaves the existence set.
class ExperimentBlowup : public std::runtime_error {
 public:
  ExperimentBlowup(const std::string& what, int n, bool tilde)
      : std::runtime_error(what), n_(n), tilde_(tilde) {}
  int n() const { return n_; }
  bool tilde() const { return tilde_; }

 private:
  int n_;
  bool tilde_;
};

/// Runs the shrinking-bump construction x_n = u0 + w_n, x~_n = x_n + v / n.
/// Under-resolved n are flagged (resolved_ok = false) and carry NaN output
/// distances; only their input distance is computed.
ExperimentReport nonuniformity_experiment(const NonUniformityConfig& cfg);

/// |v_num(T / lambda) - lambda u_num(T)|_{H^s}, v_num started from lambda u0
/// with step dt / lambda.
double scaling_check(const Field& u0, double lambda, double T, const BParams& params, const SolverConfig& config);

/// u0 -> u(1) through solve_eulerian. Throws OutsideDomain on blow-up.
Field time_one_map(const Field& u0, const BParams& params, const SolverConfig& config);

}  // namespace bfam

#endif
