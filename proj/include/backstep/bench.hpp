#pragma once

// Exact Volterra solve vs. neural-operator inference timing across grids.

#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

#include "backstep/deeponet.hpp"

namespace backstep {

struct BenchResult {
  double dx = 0.0;
  std::size_t n_points = 0;
  double analytic_mean_s = 0.0;
  double analytic_stddev_s = 0.0;
  double no_mean_s = 0.0;
  double no_stddev_s = 0.0;
  double speedup = 0.0;
  int n_repeats = 0;
  /// max_x |k_no - k_exact| / sup |k_exact| from the correctness gate.
  double gate_error = 0.0;
  /// Timer resolution exceeds 1% of either mean.
  bool low_confidence = false;
};

class BenchGateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Produces the beta_hat input on a given grid.
using BetaFamily = std::function<GridFunction(const Grid1D&)>;

struct BenchOptions {
  int n_repeats = 100;
  int warmup = 3;
  double gate_tolerance = 0.1;  ///< relative to sup |k_exact|
};

/// Times the exact kernel solve and the bound neural operator (trunk basis
/// precomputed per grid, outside the timed region) on the same input.
/// Throws BenchGateError if the two kernels disagree beyond the tolerance.
std::vector<BenchResult> run_bench(const std::vector<double>& dx_list,
                                   std::shared_ptr<const DeepOnetModel> model,
                                   const BetaFamily& beta_family, const BenchOptions& options = {});

/// Smallest observable steady_clock increment, in seconds.
double timer_resolution_s();

/// Columns dx,n_points,analytic_mean_s,analytic_stddev_s,no_mean_s,no_stddev_s,speedup,low_confidence.
void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& results);
void write_bench_table(std::ostream& out, const std::vector<BenchResult>& results);

}  // namespace backstep
