#include "backstep/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace backstep {

void LyapunovConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("lyapunov gamma must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("lyapunov c must be > 0");
  if (!(B > 0.0)) throw std::invalid_argument("projection bound B must be > 0");
}

void PassiveConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("passive gamma must be > 0");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("passive gamma0 must be > 0");
  if (!(B > 0.0)) throw std::invalid_argument("projection bound B must be > 0");
}

double control_U(const GridFunction& kernel, const GridFunction& state) {
  require_same_grid(kernel, state, "control_U");
  const std::size_t n = state.size();
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = kernel[n - 1 - j] * state[j];
  return trapezoid(g, state.dx());
}

GridFunction transform_w(const GridFunction& u, const GridFunction& kernel) {
  require_same_grid(u, kernel, "transform_w");
  return u - convolve(kernel, u);
}

GridFunction tau_lyapunov(const GridFunction& w, const GridFunction& kernel,
                          const LyapunovConfig& cfg) {
  require_same_grid(w, kernel, "tau_lyapunov");
  const std::size_t n = w.size();
  const double dx = w.dx();
  const double gain = cfg.gamma / (1.0 + weighted_norm_sq(w, cfg.c)) * w[0];

  std::vector<double> ew(n);
  for (std::size_t i = 0; i < n; ++i) ew[i] = std::exp(cfg.c * w.grid().x(i)) * w[i];

  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Trapezoid over y_j, j = i..n-1, of k(y_j - x_i) e^{c y_j} w(y_j).
    double inner = 0.0;
    if (i + 1 < n) {
      inner = 0.5 * (kernel[0] * ew[i] + kernel[n - 1 - i] * ew[n - 1]);
      for (std::size_t j = i + 1; j + 1 < n; ++j) inner += kernel[j - i] * ew[j];
      inner *= dx;
    }
    tau[i] = gain * (ew[i] - inner);
  }
  return GridFunction(w.grid(), std::move(tau));
}

double proj(double a, double b, double B) {
  if (std::abs(b) > B)
    throw std::invalid_argument("proj: |b| = " + std::to_string(std::abs(b)) +
                                " exceeds the bound " + std::to_string(B));
  if (std::abs(b) == B && a * b > 0.0) return 0.0;
  return a;
}

GridFunction projected_euler_step(const GridFunction& beta_hat, const GridFunction& tau,
                                  double B, double dt) {
  require_same_grid(beta_hat, tau, "projected_euler_step");
  std::vector<double> next(beta_hat.size());
  for (std::size_t i = 0; i < next.size(); ++i)
    next[i] = std::clamp(beta_hat[i] + dt * proj(tau[i], beta_hat[i], B), -B, B);
  return GridFunction(beta_hat.grid(), std::move(next));
}

GridFunction update_beta_lyapunov(const AdaptiveLoopState& state, const GridFunction& kernel,
                                  const LyapunovConfig& cfg, double dt) {
  const GridFunction w = transform_w(state.u, kernel);
  return projected_euler_step(state.beta_hat, tau_lyapunov(w, kernel, cfg), cfg.B, dt);
}

GridFunction tau_passive(const GridFunction& u, const GridFunction& u_hat,
                         const PassiveConfig& cfg) {
  require_same_grid(u, u_hat, "tau_passive");
  return (cfg.gamma * u[0]) * (u - u_hat);
}

GridFunction update_beta_passive(const GridFunction& beta_hat, const GridFunction& tau, double B,
                                 double dt) {
  return projected_euler_step(beta_hat, tau, B, dt);
}

Diagnostics diagnostics(const AdaptiveLoopState& state, const GridFunction& beta_true,
                        const GridFunction& kernel, const LyapunovConfig& cfg) {
  require_same_grid(state.u, beta_true, "diagnostics");
  const GridFunction beta_tilde = beta_true - state.beta_hat;
  const double beta_tilde_sq = weighted_norm_sq(beta_tilde, 0.0);
  const double u_sq = weighted_norm_sq(state.u, 0.0);
  const double u_hat_sq = state.u_hat ? weighted_norm_sq(*state.u_hat, 0.0) : 0.0;

  Diagnostics d;
  d.w_norm_c_sq = weighted_norm_sq(transform_w(state.u, kernel), cfg.c);
  d.V = 0.5 * std::log1p(d.w_norm_c_sq) + beta_tilde_sq / (2.0 * cfg.gamma);
  d.Gamma_state = u_sq + beta_tilde_sq;
  d.S = u_sq + u_hat_sq + beta_tilde_sq;
  return d;
}

}  // namespace backstep
