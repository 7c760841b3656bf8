#pragma once

// Convolution-type Volterra machinery for the backstepping gain kernel.
//
// With the backstepping operator B(xi, eta) = xi - eta*xi, the kernel map
// K(eta) solves B(xi, eta) + eta = 0. K is an involution, K(K(eta)) = eta,
// and the general equation B(xi, eta) = zeta is solved by
// xi = B(zeta, K(eta)).

#include <stdexcept>
#include <vector>

#include "backstep/numerics.hpp"

namespace backstep {

struct KernelSolveReport {
  GridFunction kernel;
  /// sup |k + beta_hat - beta_hat * k| on the grid.
  double residual_sup = 0.0;
  /// Series terms summed; 0 for the marching solver.
  int iterations = 0;
};

struct SeriesSolveReport : KernelSolveReport {
  /// sup |dk^n| for each summed term n = 0, 1, ...
  std::vector<double> term_sup;
  /// True when every term respected sup |dk^n| <= B^{n+1} / n!.
  bool term_bound_held = true;
};

class SeriesNotConvergedError : public std::runtime_error {
 public:
  SeriesNotConvergedError(int terms, double last_term_sup);
  int terms() const { return terms_; }
  double last_term_sup() const { return last_term_sup_; }

 private:
  int terms_;
  double last_term_sup_;
};

/// B(xi, eta) = xi - eta * xi.
GridFunction backstepping_B(const GridFunction& xi, const GridFunction& eta);

/// Marching solve of xi - eta * xi = zeta for xi. Explicit under the
/// left-rectangle rule: xi_i = zeta_i + dx * sum_{j<i} eta_{i-j} xi_j.
GridFunction solve_backstepping_equation(const GridFunction& zeta, const GridFunction& eta);

/// k + beta_hat - beta_hat * k, pointwise.
GridFunction kernel_residual(const GridFunction& beta_hat, const GridFunction& kernel);

/// The kernel operator K: marching solution of k = -beta_hat + beta_hat * k.
KernelSolveReport solve_kernel(const GridFunction& beta_hat);

/// Successive approximation k = sum_n dk^n with dk^0 = -beta_hat and
/// dk^{n+1} = beta_hat * dk^n. Stops once sup |dk^n| < tol.
SeriesSolveReport solve_kernel_series(const GridFunction& beta_hat, int max_terms, double tol);

/// K(K(beta)); approximately beta.
GridFunction involution_apply(const GridFunction& beta);

/// W(zeta, eta) = B(zeta, K(eta)), the closed-form inverse of B(., eta).
GridFunction solve_W(const GridFunction& zeta, const GridFunction& eta);

/// K1(beta0, beta1): the solution k1 of
///   k1 - beta0 * k1 + beta1 - beta1 * K(beta0) = 0,
/// computed by marching. On the grid this is the exact directional
/// derivative of solve_kernel at beta0 along beta1.
GridFunction kernel_time_derivative(const GridFunction& beta0, const GridFunction& beta1);

/// Closed form -beta1 + 2 beta1*K(beta0) - beta1*K(beta0)*K(beta0).
/// Agrees with kernel_time_derivative to O(dx).
GridFunction kernel_time_derivative_explicit(const GridFunction& beta0, const GridFunction& beta1);

/// sup |k1 - beta0*k1 + beta1 - beta1*K(beta0)|.
double k0k1_residual_sup(const GridFunction& beta0, const GridFunction& beta1,
                         const GridFunction& k1);

}  // namespace backstep
