#ifndef BFAM_DIAGNOSTICS_HPP
#define BFAM_DIAGNOSTICS_HPP

#include <vector>

#include "bfam/dynamics.hpp"

namespace bfam {

/// Deviation of (y o phi) phi_x^b from y(0) along a Lagrangian trajectory.
struct ConservationReport {
  std::vector<double> times;
  std::vector<double> residual_s_minus_2;
  std::vector<double> residual_sup;
  bool relative = true;

  double max_residual_s_minus_2() const;
};

/// y = (1 - d^2) u
Field momentum(const Field& u);

ConservationReport conservation_residual(const LagrangianTrajectory& traj, const BParams& params,
                                         bool relative = true);

/// (y0 / phi_x^b) o phi^{-1}: the momentum transported by phi.
Field pushforward_reconstruct(const Field& y0, const Diffeomorphism& phi, double b);

/// Indices where |f_j| > 1e-14 max|f|.
std::vector<int> numerical_support(const Field& f);

/// |f + g|_s^2 / (|f|_s^2 + |g|_s^2). Throws std::invalid_argument when the
/// numerical supports overlap.
double disjoint_support_ratio(const Field& f, const Field& g, double s);

/// |u|_{H^1}^2 = int u^2 + u_x^2
double ch_energy(const Field& u);

}  // namespace bfam

#endif
