#pragma once

// Supervised (beta_hat, kernel) pairs harvested from exact-kernel adaptive
// runs on Chebyshev plants, with a checksummed binary format.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "backstep/numerics.hpp"

namespace backstep {

struct SampleProvenance {
  std::uint64_t run_id = 0;
  double sigma = 0.0;
  double t = 0.0;
  bool blown_up = false;  ///< the run this sample came from blew up later
};

struct KernelSample {
  std::vector<double> beta_hat;  ///< at the sensors
  std::vector<double> kernel;    ///< on the grid
  SampleProvenance provenance;
};

struct GenerateOptions {
  std::size_t n_runs = 10;
  double sigma_low = 2.7;
  double sigma_high = 3.2;
  double T = 10.0;
  double subsample = 0.01;
  std::uint64_t seed = 0;
  double gamma = 1.5;
  double c = 1.0;
  double B = 5.0;
  double dx = 1e-2;
  double dt = 5e-3;
  double beta_hat0 = 1.0;
  double u0 = 1.0;
  /// 0 picks hardware concurrency, capped by BACKSTEP_NO_THREADS.
  std::size_t threads = 0;

  void validate() const;
};

struct KernelDataset {
  std::size_t sensor_count = 0;
  std::size_t n_points = 0;
  std::uint64_t seed = 0;
  /// Generation settings, kept so any sample can be regenerated.
  GenerateOptions options;
  std::vector<double> sigmas;  ///< sigma of each run, indexed by run id
  std::vector<KernelSample> samples;

  Grid1D grid() const { return Grid1D(n_points); }
  /// Throws std::invalid_argument on shape errors or duplicate (run, t) keys.
  void validate() const;
};

/// Runs the exact-kernel Lyapunov loop once per sigma draw and records
/// (beta_hat, kernel) at t = 0, subsample, 2 subsample, ... < T. Runs execute
/// in parallel; samples come out in (run, t) order.
KernelDataset generate(const GenerateOptions& options);

/// Thread count used for generation: requested (or hardware) count, capped by
/// BACKSTEP_NO_THREADS when set.
std::size_t generation_threads(std::size_t requested);

constexpr std::uint32_t kDatasetFormatVersion = 1;

void save_dataset(const KernelDataset& ds, const std::string& path);
/// Throws BadMagicError, VersionMismatchError, TruncatedFileError or ChecksumError.
KernelDataset load_dataset(const std::string& path);

/// One row per sample: run_id,sigma,t,blown_up,beta_hat_0..,kernel_0..
void export_csv(const KernelDataset& ds, std::ostream& out);

/// Re-runs the sample's run from scratch up to its time stamp and returns it.
KernelSample reproduce_sample(const KernelDataset& ds, std::size_t index);

struct SpotCheckReport {
  std::size_t checked = 0;
  double max_residual = 0.0;
  double bound = 0.0;  ///< 10 dx (1 + B e^B)
  bool passed = true;
};

/// Re-checks the Volterra residual of a random fraction of samples.
SpotCheckReport spot_check(const KernelDataset& ds, double fraction, std::uint64_t seed);

}  // namespace backstep
