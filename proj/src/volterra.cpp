#include "backstep/volterra.hpp"

#include <cmath>
#include <string>

#include "backstep/kernel_operator.hpp"

namespace backstep {

namespace {

void require_finite(const GridFunction& f, const char* what) {
  if (!f.all_finite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace

SeriesNotConvergedError::SeriesNotConvergedError(int terms, double last_term_sup)
    : std::runtime_error("kernel series did not converge after " + std::to_string(terms) +
                         " terms (last term sup " + std::to_string(last_term_sup) + ")"),
      terms_(terms),
      last_term_sup_(last_term_sup) {}

GridFunction backstepping_B(const GridFunction& xi, const GridFunction& eta) {
  require_same_grid(xi, eta, "backstepping_B");
  return xi - convolve(eta, xi);
}

GridFunction solve_backstepping_equation(const GridFunction& zeta, const GridFunction& eta) {
  require_same_grid(zeta, eta, "solve_backstepping_equation");
  require_finite(zeta, "solve_backstepping_equation");
  require_finite(eta, "solve_backstepping_equation");
  const std::size_t n = zeta.size();
  const double dx = zeta.dx();
  std::vector<double> xi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += eta[i - j] * xi[j];
    xi[i] = zeta[i] + dx * acc;
  }
  return GridFunction(zeta.grid(), std::move(xi));
}

GridFunction kernel_residual(const GridFunction& beta_hat, const GridFunction& kernel) {
  return kernel + beta_hat - convolve(beta_hat, kernel);
}

KernelSolveReport solve_kernel(const GridFunction& beta_hat) {
  require_finite(beta_hat, "solve_kernel");
  GridFunction k = solve_backstepping_equation(-beta_hat, beta_hat);
  const double residual = sup_norm(kernel_residual(beta_hat, k));
  return KernelSolveReport{std::move(k), residual, 0};
}

SeriesSolveReport solve_kernel_series(const GridFunction& beta_hat, int max_terms, double tol) {
  if (max_terms < 1) throw std::invalid_argument("solve_kernel_series: max_terms must be >= 1");
  require_finite(beta_hat, "solve_kernel_series");

  const double bound = sup_norm(beta_hat);
  SeriesSolveReport report{{GridFunction(beta_hat.grid()), 0.0, 0}, {}, true};
  GridFunction term = -beta_hat;
  double factorial = 1.0;
  double power = bound;
  for (int n = 0; n < max_terms; ++n) {
    const double size = sup_norm(term);
    report.term_sup.push_back(size);
    // Discrete left-rectangle sums underestimate the monotone integrals in
    // the induction, so the bound holds on the grid as well.
    if (size > power / factorial * (1.0 + 1e-12) + 1e-300) report.term_bound_held = false;
    report.kernel += term;
    report.iterations = n + 1;
    if (size < tol) {
      report.residual_sup = sup_norm(kernel_residual(beta_hat, report.kernel));
      return report;
    }
    term = convolve(beta_hat, term);
    power *= bound;
    factorial *= static_cast<double>(n + 1);
  }
  throw SeriesNotConvergedError(max_terms, report.term_sup.back());
}

GridFunction involution_apply(const GridFunction& beta) {
  return solve_kernel(solve_kernel(beta).kernel).kernel;
}

GridFunction solve_W(const GridFunction& zeta, const GridFunction& eta) {
  require_same_grid(zeta, eta, "solve_W");
  return backstepping_B(zeta, solve_kernel(eta).kernel);
}

GridFunction kernel_time_derivative(const GridFunction& beta0, const GridFunction& beta1) {
  require_same_grid(beta0, beta1, "kernel_time_derivative");
  const GridFunction k0 = solve_kernel(beta0).kernel;
  return solve_backstepping_equation(convolve(beta1, k0) - beta1, beta0);
}

GridFunction kernel_time_derivative_explicit(const GridFunction& beta0,
                                             const GridFunction& beta1) {
  require_same_grid(beta0, beta1, "kernel_time_derivative_explicit");
  const GridFunction k0 = solve_kernel(beta0).kernel;
  const GridFunction b1k0 = convolve(beta1, k0);
  return -beta1 + 2.0 * b1k0 - convolve(b1k0, k0);
}

double k0k1_residual_sup(const GridFunction& beta0, const GridFunction& beta1,
                         const GridFunction& k1) {
  require_same_grid(beta0, beta1, "k0k1_residual_sup");
  require_same_grid(beta0, k1, "k0k1_residual_sup");
  const GridFunction k0 = solve_kernel(beta0).kernel;
  return sup_norm(k1 - convolve(beta0, k1) + beta1 - convolve(beta1, k0));
}

GridFunction ExactKernelOperator::operator()(const GridFunction& beta_hat) const {
  require_finite(beta_hat, "ExactKernelOperator");
  return solve_backstepping_equation(-beta_hat, beta_hat);
}

}  // namespace backstep
