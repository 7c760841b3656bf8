#include "backstep/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "backstep/kernel_operator.hpp"

namespace backstep {

namespace {

using Clock = std::chrono::steady_clock;

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

template <typename F>
Stats time_calls(F&& f, int warmup, int repeats) {
  for (int i = 0; i < warmup; ++i) f();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(repeats));
  for (int i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    f();
    samples.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  Stats s;
  for (double v : samples) s.mean += v;
  s.mean /= static_cast<double>(repeats);
  double var = 0.0;
  for (double v : samples) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(repeats - 1));
  return s;
}

// Keeps results observable so the optimizer cannot drop the timed call.
volatile double g_sink = 0.0;

}  // namespace

double timer_resolution_s() {
  double best = 1.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = Clock::now();
    auto b = Clock::now();
    while (b == a) b = Clock::now();
    best = std::min(best, std::chrono::duration<double>(b - a).count());
  }
  return best;
}

std::vector<BenchResult> run_bench(const std::vector<double>& dx_list,
                                   std::shared_ptr<const DeepOnetModel> model,
                                   const BetaFamily& beta_family, const BenchOptions& options) {
  if (options.n_repeats < 2) throw std::invalid_argument("bench needs at least 2 repeats");
  if (!model) throw std::invalid_argument("bench needs a model");
  const double resolution = timer_resolution_s();
  const ExactKernelOperator exact;

  std::vector<BenchResult> results;
  for (double dx : dx_list) {
    const Grid1D grid = Grid1D::with_spacing(dx);
    const GridFunction beta_hat = beta_family(grid);
    const NeuralKernelOperator neural(model, grid);

    BenchResult r;
    r.dx = dx;
    r.n_points = grid.size();
    r.n_repeats = options.n_repeats;
    const GridFunction k_exact = exact(beta_hat);
    const GridFunction k_no = neural(beta_hat);
    r.gate_error = sup_norm(k_no - k_exact) / std::max(sup_norm(k_exact), 1e-300);
    if (r.gate_error > options.gate_tolerance)
      throw BenchGateError("bench correctness gate failed at dx=" + std::to_string(dx) +
                           ": neural kernel error " + std::to_string(r.gate_error) +
                           " of sup|k|");

    const Stats a = time_calls([&] { g_sink = exact(beta_hat).back(); }, options.warmup,
                               options.n_repeats);
    const Stats n = time_calls([&] { g_sink = neural(beta_hat).back(); }, options.warmup,
                               options.n_repeats);
    r.analytic_mean_s = a.mean;
    r.analytic_stddev_s = a.stddev;
    r.no_mean_s = n.mean;
    r.no_stddev_s = n.stddev;
    r.speedup = a.mean / n.mean;
    r.low_confidence = resolution > 0.01 * std::min(a.mean, n.mean);
    results.push_back(r);
  }
  return results;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& results) {
  out.precision(10);
  out << "dx,n_points,analytic_mean_s,analytic_stddev_s,no_mean_s,no_stddev_s,speedup,"
         "low_confidence\n";
  for (const BenchResult& r : results)
    out << r.dx << ',' << r.n_points << ',' << r.analytic_mean_s << ',' << r.analytic_stddev_s
        << ',' << r.no_mean_s << ',' << r.no_stddev_s << ',' << r.speedup << ','
        << (r.low_confidence ? 1 : 0) << '\n';
}

void write_bench_table(std::ostream& out, const std::vector<BenchResult>& results) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %14s %14s %12s\n", "dx", "Analytic (s)", "NO (s)",
                "Speedup");
  out << line;
  for (const BenchResult& r : results) {
    std::snprintf(line, sizeof line, "%-10g %14.6g %14.6g %11.1fx%s\n", r.dx, r.analytic_mean_s,
                  r.no_mean_s, r.speedup, r.low_confidence ? "  (low confidence)" : "");
    out << line;
  }
}

}  // namespace backstep
