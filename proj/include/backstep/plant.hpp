#pragma once

// First-order upwind simulation of u_t = u_x + beta(x) u(0,t), u(1,t) = U(t),
// the passive observer, and the closed-loop driver.

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "backstep/adaptive.hpp"
#include "backstep/kernel_operator.hpp"
#include "backstep/numerics.hpp"

namespace backstep {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlantConfig {
  Grid1D grid;
  double dt;
  GridFunction beta;  ///< true plant coefficient
  GridFunction u0;
  double B = 5.0;     ///< declared bound on |beta| and |beta_hat|

  /// Throws ConfigError on CFL violation (dt > dx), grid mismatch, or |beta| > B.
  void validate() const;
};

/// beta(x) = amplitude * cos(sigma * arccos(x)).
GridFunction chebyshev_beta(const Grid1D& grid, double sigma, double amplitude = 5.0);

/// One upwind step; the recirculation term uses u(0) from the current level
/// and the boundary value U is applied after the interior update.
GridFunction step_plant(const GridFunction& u, double U, const GridFunction& beta, double dt);

/// One upwind step of u_hat_t = u_hat_x + beta_hat u(0) + gamma0 (u - u_hat) u(0)^2, u_hat(1) = U.
GridFunction step_observer(const GridFunction& u_hat, const GridFunction& u, double U,
                           const GridFunction& beta_hat, double gamma0, double dt);

enum class ControllerKind { open_loop, exact_lyapunov, no_lyapunov, exact_passive, no_passive };

std::string to_string(ControllerKind kind);
/// Throws ConfigError for unknown names.
ControllerKind parse_controller_kind(const std::string& name);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::exact_lyapunov;
  double gamma = 1e-2;
  double c = 1.0;
  double gamma0 = 1.0;
  /// Kernel map for the no-* kinds; the exact operator is used otherwise.
  std::shared_ptr<const KernelOperator> kernel_operator;
  /// Initial estimate; defaults to beta_hat = 1.
  std::optional<GridFunction> beta_hat0;
  /// Initial observer state; defaults to u0.
  std::optional<GridFunction> u_hat0;
};

struct Snapshot {
  double t;
  GridFunction u;
  GridFunction beta_hat;
  GridFunction kernel;
  std::optional<GridFunction> u_hat;
};

/// Per-step scalar record.
struct ScalarSample {
  double t = 0.0;
  double U = 0.0;
  double u_l2 = 0.0;
  double u_sup = 0.0;
  double w_norm_c = 0.0;
  double V = 0.0;
  double Gamma = 0.0;
  double S = 0.0;
  double beta_hat_sup = 0.0;
  /// Running integrals of e(0,t)^2 and ||e(t)||^2, e = u - u_hat (passive kinds only).
  double e0_sq_integral = 0.0;
  double e_sq_integral = 0.0;
};

struct Trajectory {
  ControllerKind kind = ControllerKind::open_loop;
  std::vector<Snapshot> snapshots;
  std::vector<ScalarSample> scalars;
  bool blew_up = false;
  double blowup_time = 0.0;

  const Snapshot& final_snapshot() const { return snapshots.back(); }

  /// Writes u.csv, beta_hat.csv, kernel.csv, scalars.csv (and u_hat.csv,
  /// identifier.csv for passive runs) into dir.
  void write_csv(const std::filesystem::path& dir) const;
};

constexpr double kBlowUpThreshold = 1e12;

/// Simulates the closed loop on [0, T]. Scalars are recorded every step,
/// snapshots every sample_every and at the final time. Stops early, with
/// blew_up set, once sup |u| exceeds kBlowUpThreshold; the last snapshot is
/// then the last finite state.
Trajectory run_closed_loop(const PlantConfig& config, const ControllerSpec& controller, double T,
                           double sample_every);

}  // namespace backstep
