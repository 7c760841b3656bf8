#pragma once

// Adaptive laws: the normalized Lyapunov update with projection, the
// passive-identifier update, the boundary feedback, and stability
// diagnostics.

#include <optional>

#include "backstep/numerics.hpp"

namespace backstep {

struct LyapunovConfig {
  double gamma = 1e-2;  ///< adaptation gain
  double c = 1.0;       ///< exponential weight in ||w||_c
  double B = 5.0;       ///< projection bound on |beta_hat|
  void validate() const;
};

struct PassiveConfig {
  double gamma = 1.0;   ///< update gain
  double gamma0 = 1.0;  ///< observer nonlinear damping
  double B = 5.0;
  void validate() const;
};

/// Plant state u, estimate beta_hat, and observer state u_hat (passive scheme only).
struct AdaptiveLoopState {
  double t = 0.0;
  GridFunction u;
  GridFunction beta_hat;
  std::optional<GridFunction> u_hat;
};

struct Diagnostics {
  double V = 0.0;            ///< 1/2 ln(1 + ||w||_c^2) + 1/(2 gamma) ||beta - beta_hat||^2
  double Gamma_state = 0.0;  ///< ||u||^2 + ||beta - beta_hat||^2
  double S = 0.0;            ///< ||u||^2 + ||u_hat||^2 + ||beta - beta_hat||^2
  double w_norm_c_sq = 0.0;  ///< ||w||_c^2
};

/// U = int_0^1 k(1-y) state(y) dy, trapezoidal.
double control_U(const GridFunction& kernel, const GridFunction& state);

/// w = u - kernel * u.
GridFunction transform_w(const GridFunction& u, const GridFunction& kernel);

/// tau(x) = gamma / (1 + ||w||_c^2) * [e^{cx} w(x) - int_x^1 k(y-x) e^{cy} w(y) dy] * w(0).
GridFunction tau_lyapunov(const GridFunction& w, const GridFunction& kernel,
                          const LyapunovConfig& cfg);

/// Pointwise projection: 0 if |b| = B and a*b > 0, else a. Requires |b| <= B.
double proj(double a, double b, double B);

/// beta_hat + dt * Proj(tau, beta_hat), clamped to [-B, B].
GridFunction projected_euler_step(const GridFunction& beta_hat, const GridFunction& tau,
                                  double B, double dt);

/// One Euler step of the Lyapunov update law driven by state.u and the kernel in use.
GridFunction update_beta_lyapunov(const AdaptiveLoopState& state, const GridFunction& kernel,
                                  const LyapunovConfig& cfg, double dt);

/// tau(x) = gamma (u(x) - u_hat(x)) u(0).
GridFunction tau_passive(const GridFunction& u, const GridFunction& u_hat,
                         const PassiveConfig& cfg);

GridFunction update_beta_passive(const GridFunction& beta_hat, const GridFunction& tau, double B,
                                 double dt);

/// Lyapunov and stability quantities; needs the true coefficient, so tests and
/// simulation reports only.
Diagnostics diagnostics(const AdaptiveLoopState& state, const GridFunction& beta_true,
                        const GridFunction& kernel, const LyapunovConfig& cfg);

}  // namespace backstep
