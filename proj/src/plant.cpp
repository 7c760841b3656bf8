#include "backstep/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace backstep {

void PlantConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("plant.dt must be positive");
  if (dt > grid.dx() * (1.0 + 1e-12))
    throw ConfigError("CFL violation: plant.dt = " + std::to_string(dt) +
                      " exceeds dx = " + std::to_string(grid.dx()));
  if (!(beta.grid() == grid) || !(u0.grid() == grid))
    throw ConfigError("plant beta and u0 must be sampled on the plant grid");
  if (!(B > 0.0)) throw ConfigError("plant.B must be positive");
  if (sup_norm(beta) > B * (1.0 + 1e-12))
    throw ConfigError("plant.beta exceeds the declared bound B = " + std::to_string(B));
  if (!beta.all_finite() || !u0.all_finite()) throw ConfigError("plant data must be finite");
}

GridFunction chebyshev_beta(const Grid1D& grid, double sigma, double amplitude) {
  return GridFunction::sample(grid, [&](double x) {
    return amplitude * std::cos(sigma * std::acos(std::clamp(x, -1.0, 1.0)));
  });
}

GridFunction step_plant(const GridFunction& u, double U, const GridFunction& beta, double dt) {
  require_same_grid(u, beta, "step_plant");
  const std::size_t n = u.size();
  const double ratio = dt / u.dx();
  const double u_left = u[0];
  std::vector<double> next(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    next[i] = (1.0 - ratio) * u[i] + ratio * u[i + 1] + dt * beta[i] * u_left;
  next[n - 1] = U;
  return GridFunction(u.grid(), std::move(next));
}

GridFunction step_observer(const GridFunction& u_hat, const GridFunction& u, double U,
                           const GridFunction& beta_hat, double gamma0, double dt) {
  require_same_grid(u_hat, u, "step_observer");
  require_same_grid(u_hat, beta_hat, "step_observer");
  const std::size_t n = u.size();
  const double ratio = dt / u.dx();
  const double u_left = u[0];
  const double damping = gamma0 * u_left * u_left;
  std::vector<double> next(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    next[i] = (1.0 - ratio) * u_hat[i] + ratio * u_hat[i + 1] + dt * beta_hat[i] * u_left +
              dt * damping * (u[i] - u_hat[i]);
  next[n - 1] = U;
  return GridFunction(u.grid(), std::move(next));
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::open_loop: return "open-loop";
    case ControllerKind::exact_lyapunov: return "exact-lyapunov";
    case ControllerKind::no_lyapunov: return "no-lyapunov";
    case ControllerKind::exact_passive: return "exact-passive";
    case ControllerKind::no_passive: return "no-passive";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
  for (auto kind : {ControllerKind::open_loop, ControllerKind::exact_lyapunov,
                    ControllerKind::no_lyapunov, ControllerKind::exact_passive,
                    ControllerKind::no_passive})
    if (to_string(kind) == name) return kind;
  throw ConfigError("controller.kind: unknown controller '" + name + "'");
}

namespace {

bool is_passive(ControllerKind k) {
  return k == ControllerKind::exact_passive || k == ControllerKind::no_passive;
}

bool is_neural(ControllerKind k) {
  return k == ControllerKind::no_lyapunov || k == ControllerKind::no_passive;
}

bool exceeded(const GridFunction& f) {
  for (double v : f.values())
    if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) return true;
  return false;
}

void write_field(const std::filesystem::path& path, const std::vector<Snapshot>& snaps,
                 const GridFunction& (*field)(const Snapshot&)) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  const Grid1D& grid = field(snaps.front()).grid();
  out << 't';
  for (std::size_t i = 0; i < grid.size(); ++i) out << ',' << grid.x(i);
  out << '\n';
  for (const Snapshot& s : snaps) {
    out << s.t;
    for (double v : field(s).values()) out << ',' << v;
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

void Trajectory::write_csv(const std::filesystem::path& dir) const {
  if (snapshots.empty()) return;
  write_field(dir / "u.csv", snapshots, [](const Snapshot& s) -> const GridFunction& { return s.u; });
  write_field(dir / "beta_hat.csv", snapshots,
              [](const Snapshot& s) -> const GridFunction& { return s.beta_hat; });
  write_field(dir / "kernel.csv", snapshots,
              [](const Snapshot& s) -> const GridFunction& { return s.kernel; });

  std::ofstream out(dir / "scalars.csv");
  if (!out) throw std::runtime_error("cannot write " + (dir / "scalars.csv").string());
  out.precision(17);
  out << "t,U,u_l2,w_c,V,Gamma\n";
  for (const ScalarSample& s : scalars)
    out << s.t << ',' << s.U << ',' << s.u_l2 << ',' << s.w_norm_c << ',' << s.V << ','
        << s.Gamma << '\n';

  if (is_passive(kind)) {
    write_field(dir / "u_hat.csv", snapshots,
                [](const Snapshot& s) -> const GridFunction& { return *s.u_hat; });
    std::ofstream id(dir / "identifier.csv");
    id.precision(17);
    id << "t,e0_sq_integral,e_sq_integral,S\n";
    for (const ScalarSample& s : scalars)
      id << s.t << ',' << s.e0_sq_integral << ',' << s.e_sq_integral << ',' << s.S << '\n';
  }
}

Trajectory run_closed_loop(const PlantConfig& config, const ControllerSpec& controller, double T,
                           double sample_every) {
  config.validate();
  if (!(T > 0.0)) throw ConfigError("run.T must be positive");
  if (sample_every < config.dt * (1.0 - 1e-9))
    throw ConfigError("run.sample_every must be at least dt");
  const bool passive = is_passive(controller.kind);
  const bool open_loop = controller.kind == ControllerKind::open_loop;
  if (is_neural(controller.kind) && !controller.kernel_operator)
    throw ConfigError("controller " + to_string(controller.kind) + " needs a kernel operator");

  const LyapunovConfig lyap{controller.gamma, controller.c, config.B};
  const PassiveConfig pas{controller.gamma, controller.gamma0, config.B};
  try {
    if (passive) pas.validate(); else lyap.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const ExactKernelOperator exact;
  const KernelOperator& op = is_neural(controller.kind) ? *controller.kernel_operator
                                                        : static_cast<const KernelOperator&>(exact);

  AdaptiveLoopState state{0.0, config.u0,
                          controller.beta_hat0.value_or(GridFunction::constant(config.grid, 1.0)),
                          std::nullopt};
  require_same_grid(state.beta_hat, config.u0, "initial beta_hat");
  if (sup_norm(state.beta_hat) > config.B)
    throw ConfigError("initial beta_hat exceeds the projection bound B");
  if (passive) {
    state.u_hat = controller.u_hat0.value_or(config.u0);
    require_same_grid(*state.u_hat, config.u0, "initial u_hat");
  }

  const auto n_steps = static_cast<long long>(std::llround(T / config.dt));
  const auto stride = std::max(1LL, static_cast<long long>(std::llround(sample_every / config.dt)));

  Trajectory traj;
  traj.kind = controller.kind;
  traj.scalars.reserve(static_cast<std::size_t>(n_steps) + 1);
  double e0_integral = 0.0;
  double e_integral = 0.0;

  for (long long step = 0;; ++step) {
    state.t = static_cast<double>(step) * config.dt;
    GridFunction kernel = op(state.beta_hat);
    const GridFunction& feedback_state = passive ? *state.u_hat : state.u;
    const double U = open_loop ? 0.0 : control_U(kernel, feedback_state);

    const Diagnostics diag = diagnostics(state, config.beta, kernel, lyap);
    ScalarSample sample;
    sample.t = state.t;
    sample.U = U;
    sample.u_l2 = l2_norm(state.u);
    sample.u_sup = sup_norm(state.u);
    sample.w_norm_c = std::sqrt(diag.w_norm_c_sq);
    sample.V = diag.V;
    sample.Gamma = diag.Gamma_state;
    sample.S = diag.S;
    sample.beta_hat_sup = sup_norm(state.beta_hat);
    sample.e0_sq_integral = e0_integral;
    sample.e_sq_integral = e_integral;
    traj.scalars.push_back(sample);

    const bool last = step >= n_steps;
    if (step % stride == 0 || last)
      traj.snapshots.push_back({state.t, state.u, state.beta_hat, kernel, state.u_hat});
    if (last) break;

    GridFunction beta_next = state.beta_hat;
    if (controller.kind == ControllerKind::exact_lyapunov ||
        controller.kind == ControllerKind::no_lyapunov) {
      beta_next = update_beta_lyapunov(state, kernel, lyap, config.dt);
    } else if (passive) {
      beta_next = update_beta_passive(state.beta_hat, tau_passive(state.u, *state.u_hat, pas),
                                      config.B, config.dt);
    }

    GridFunction u_next = step_plant(state.u, U, config.beta, config.dt);
    std::optional<GridFunction> u_hat_next;
    if (passive) {
      const GridFunction e = state.u - *state.u_hat;
      e0_integral += config.dt * e[0] * e[0];
      e_integral += config.dt * weighted_norm_sq(e, 0.0);
      u_hat_next = step_observer(*state.u_hat, state.u, U, state.beta_hat, controller.gamma0,
                                 config.dt);
    }

    if (exceeded(u_next) || (u_hat_next && exceeded(*u_hat_next))) {
      traj.blew_up = true;
      traj.blowup_time = state.t + config.dt;
      const bool finite = u_next.all_finite() && (!u_hat_next || u_hat_next->all_finite()) &&
                          beta_next.all_finite();
      if (finite) {
        traj.snapshots.push_back(
            {traj.blowup_time, u_next, beta_next, op(beta_next), u_hat_next});
      } else if (traj.snapshots.back().t != state.t) {
        traj.snapshots.push_back({state.t, state.u, state.beta_hat, kernel, state.u_hat});
      }
      break;
    }

    state.u = std::move(u_next);
    state.beta_hat = std::move(beta_next);
    if (passive) state.u_hat = std::move(u_hat_next);
  }
  return traj;
}

}  // namespace backstep
