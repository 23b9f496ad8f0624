#ifndef BFAM_DIFFEO_HPP
#define BFAM_DIFFEO_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "bfam/field.hpp"

namespace bfam {

/// Thrown when phi_x = 1 + f_x fails to stay positive.
class NotADiffeomorphism : public std::domain_error {
 public:
  NotADiffeomorphism(double min_jacobian, int index);
  double min_jacobian() const { return min_jacobian_; }
  int index() const { return index_; }

 private:
  double min_jacobian_;
  int index_;
};

/// Thrown by invert() when root finding fails at a grid point.
class InversionFailure : public std::runtime_error {
 public:
  InversionFailure(const std::string& what, int index) : std::runtime_error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// phi(x) = x + f(x) with periodic displacement f and phi_x > 0 on the grid.
class Diffeomorphism {
 public:
  /// Throws NotADiffeomorphism when min_j (1 + f_x(x_j)) <= 0.
  explicit Diffeomorphism(Field displacement);

  static Diffeomorphism identity(const Grid& grid);

  const Grid& grid() const { return displacement_.grid(); }
  const Field& displacement() const { return displacement_; }

  /// phi_x = 1 + f_x (spectral).
  Field jacobian() const;
  double min_jacobian() const { return min_jacobian_; }

  /// phi(x_j)
  double at(int j) const { return grid().x(j) + displacement_[j]; }

  bool is_identity() const;

  /// Returns c when the displacement is the same constant at every grid point.
  std::optional<double> constant_shift() const;

 private:
  Field displacement_;
  double min_jacobian_;
};

struct InversionOptions {
  double min_margin = 1e-6;
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Samples of g o phi at the grid points.
Field compose_field(const Field& g, const Diffeomorphism& phi);

/// phi o psi, with displacement f_psi + f_phi o psi.
Diffeomorphism compose_diffeo(const Diffeomorphism& phi, const Diffeomorphism& psi);

/// phi^{-1} at the grid points by bracketed Newton iteration on phi(y) = x_j.
Diffeomorphism invert(const Diffeomorphism& phi, const InversionOptions& options = {});

/// R_phi d^k R_{phi^{-1}} f for k = 1, 2:
///   k = 1: f_x / phi_x
///   k = 2: f_xx / phi_x^2 - f_x phi_xx / phi_x^3
Field conjugated_derivative(const Diffeomorphism& phi, const Field& f, int order);

}  // namespace bfam

#endif
