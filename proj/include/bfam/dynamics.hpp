#ifndef BFAM_DYNAMICS_HPP
#define BFAM_DYNAMICS_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bfam/diffeo.hpp"
#include "bfam/field.hpp"

namespace bfam {

/// Family parameter b and the Sobolev index s > 3/2 used for every norm.
class BParams {
 public:
  BParams(double b, double s);
  double b() const { return b_; }
  double s() const { return s_; }

 private:
  double b_;
  double s_;
};

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  int snapshot_stride = 1;
  double blowup_norm_cap = 1e6;
  double min_phix = 1e-6;
  // Conjugated Helmholtz solve inside christoffel_at.
  double christoffel_tol = 1e-10;
  int christoffel_max_iter = 200;

  /// Throws std::invalid_argument on a non-positive step or horizon, dt > T,
  /// stride < 1, or non-positive caps.
  void validate() const;
};

/// min(1e-3, 0.5 h / max|u0|)
double default_time_step(const Field& u0);

enum class Termination { completed, blowup_norm, blowup_phix };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct SprayState {
  Diffeomorphism phi;
  Field phit;
};

template <class State>
struct Trajectory {
  BParams params;
  SolverConfig config;
  std::vector<double> times;
  std::vector<State> states;
  Termination termination = Termination::completed;

  const State& final_state() const { return states.back(); }
  bool completed() const { return termination == Termination::completed; }
};

using EulerianTrajectory = Trajectory<Field>;
using LagrangianTrajectory = Trajectory<SprayState>;

/// A solver produced a non-finite value.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// The conjugated Helmholtz iteration did not converge and no fallback was allowed
/// (or the fallback failed too).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data whose trajectory does not reach the requested time.
class OutsideDomain : public std::runtime_error {
 public:
  OutsideDomain(const std::string& what, Termination why) : std::runtime_error(what), why_(why) {}
  Termination why() const { return why_; }

 private:
  Termination why_;
};

/// u_t = -u u_x + (1 - d^2)^{-1}(-b u u_x + (b - 3) u_x u_xx), products dealiased.
Field rhs_eulerian(const Field& u, const BParams& params);

/// Classical RK4 on rhs_eulerian with fixed dt.
EulerianTrajectory solve_eulerian(const Field& u0, const BParams& params, const SolverConfig& config);

/// (1 - d^2)^{-1} B(v, w) with the symmetric form
///   B(v, w) = -(b/2)(v w_x + w v_x) + ((b - 3)/2)(v_x w_xx + w_x v_xx).
Field christoffel_id(const Field& v, const Field& w, const BParams& params);

struct ChristoffelOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// On stall or non-convergence use the explicit-inversion pipeline.
  bool allow_fallback = true;
  /// Optional warm start for the iteration.
  const Field* initial_guess = nullptr;
};

struct ChristoffelResult {
  Field value;
  int iterations = 0;
  bool used_fallback = false;
};

/// Gamma_phi(v, v) = Gamma_id(v o phi^{-1}, v o phi^{-1}) o phi, evaluated in
/// label coordinates without inverting phi.
ChristoffelResult christoffel_at_detailed(const Diffeomorphism& phi, const Field& v, const BParams& params,
                                          const ChristoffelOptions& options = {});

Field christoffel_at(const Diffeomorphism& phi, const Field& v, const BParams& params,
                     const ChristoffelOptions& options = {});

/// The explicit pipeline compose(Gamma_id(v o phi^{-1}), phi).
Field christoffel_at_literal(const Diffeomorphism& phi, const Field& v, const BParams& params);

/// RK4 on (phi, phi_t)' = (phi_t, Gamma_phi(phi_t, phi_t)) from (id, u0).
LagrangianTrajectory solve_geodesic(const Field& u0, const BParams& params, const SolverConfig& config);

/// phi_v(1). Throws OutsideDomain when the geodesic does not reach t = 1.
/// config.T is ignored.
Diffeomorphism exp_map(const Field& v, const BParams& params, const SolverConfig& config);

/// (exp(u0 + eps v) - exp(u0 - eps v)) / (2 eps) on displacements. The two
/// geodesics run concurrently.
Field dexp(const Field& u0, const Field& v, const BParams& params, double eps, const SolverConfig& config);

/// Integrates phi_t = u(t) o phi with RK4 on the snapshot times of an
/// Eulerian run (u linear in time between snapshots). Requires stride 1.
LagrangianTrajectory flow_from_velocity(const EulerianTrajectory& traj);

/// u = phi_t o phi^{-1}
Field eulerian_from_lagrangian(const SprayState& state);

}  // namespace bfam

#endif
