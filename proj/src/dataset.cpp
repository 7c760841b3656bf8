#include "backstep/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "backstep/binary_io.hpp"
#include "backstep/plant.hpp"
#include "backstep/rng.hpp"
#include "backstep/volterra.hpp"

namespace backstep {

namespace {

constexpr char kDatasetMagic[] = "KDS1";
constexpr std::uint32_t kBlownUpFlag = 1;

struct RunOutput {
  std::vector<KernelSample> samples;
};

PlantConfig plant_for(const GenerateOptions& o, double sigma) {
  const Grid1D grid = Grid1D::with_spacing(o.dx);
  return PlantConfig{grid, o.dt, chebyshev_beta(grid, sigma, o.B),
                     GridFunction::constant(grid, o.u0), o.B};
}

ControllerSpec controller_for(const GenerateOptions& o) {
  ControllerSpec spec;
  spec.kind = ControllerKind::exact_lyapunov;
  spec.gamma = o.gamma;
  spec.c = o.c;
  spec.beta_hat0 = GridFunction::constant(Grid1D::with_spacing(o.dx), o.beta_hat0);
  return spec;
}

bool on_lattice(double t, double step) {
  const double k = t / step;
  return std::abs(k - std::round(k)) < 1e-6;
}

RunOutput simulate_run(const GenerateOptions& o, std::uint64_t run_id, double sigma, double T) {
  const Trajectory traj = run_closed_loop(plant_for(o, sigma), controller_for(o), T, o.subsample);
  RunOutput out;
  double last_t = -1.0;
  for (const Snapshot& s : traj.snapshots) {
    if (s.t >= o.T - 0.5 * o.dt || !on_lattice(s.t, o.subsample) || s.t <= last_t) continue;
    last_t = s.t;
    out.samples.push_back({s.beta_hat.data(), s.kernel.data(), {run_id, sigma, s.t, traj.blew_up}});
  }
  return out;
}

std::size_t record_size(const KernelDataset& ds) {
  return 8 + 8 + 8 + 4 + 8 * (ds.sensor_count + ds.n_points);
}

}  // namespace

void GenerateOptions::validate() const {
  if (n_runs == 0) throw std::invalid_argument("dataset.n_runs must be positive");
  if (!(sigma_low < sigma_high)) throw std::invalid_argument("dataset.sigma_low must be < sigma_high");
  if (!(T > 0.0)) throw std::invalid_argument("dataset.T must be positive");
  if (subsample < dt * (1.0 - 1e-9)) throw std::invalid_argument("dataset.subsample must be >= dt");
  if (!on_lattice(subsample, dt))
    throw std::invalid_argument("dataset.subsample must be a multiple of dt");
  if (!(gamma > 0.0) || !(c > 0.0) || !(B > 0.0))
    throw std::invalid_argument("dataset gamma, c and B must be positive");
  if (std::abs(beta_hat0) > B) throw std::invalid_argument("dataset.beta_hat0 exceeds B");
  if (dt > dx * (1.0 + 1e-12)) throw std::invalid_argument("CFL violation: dataset.dt exceeds dx");
  Grid1D::with_spacing(dx);
}

void KernelDataset::validate() const {
  if (sensor_count == 0 || n_points < 2) throw std::invalid_argument("dataset has no grid");
  std::set<std::pair<std::uint64_t, double>> keys;
  for (const KernelSample& s : samples) {
    if (s.beta_hat.size() != sensor_count || s.kernel.size() != n_points)
      throw std::invalid_argument("dataset sample has the wrong length");
    if (!keys.insert({s.provenance.run_id, s.provenance.t}).second)
      throw std::invalid_argument("duplicate (run, t) key in dataset");
  }
}

std::size_t generation_threads(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("BACKSTEP_NO_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
  }
  return n;
}

KernelDataset generate(const GenerateOptions& options) {
  options.validate();
  KernelDataset ds;
  ds.options = options;
  ds.seed = options.seed;
  ds.n_points = Grid1D::with_spacing(options.dx).size();
  ds.sensor_count = ds.n_points;

  Rng rng(options.seed);
  for (std::size_t r = 0; r < options.n_runs; ++r)
    ds.sigmas.push_back(rng.uniform(options.sigma_low, options.sigma_high));

  std::vector<RunOutput> outputs(options.n_runs);
  std::vector<std::exception_ptr> errors(options.n_runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < options.n_runs;) {
      try {
        outputs[r] = simulate_run(options, r, ds.sigmas[r], options.T);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(generation_threads(options.threads), options.n_runs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  for (RunOutput& out : outputs)
    std::move(out.samples.begin(), out.samples.end(), std::back_inserter(ds.samples));
  return ds;
}

void save_dataset(const KernelDataset& ds, const std::string& path) {
  ds.validate();
  const GenerateOptions& o = ds.options;
  ByteWriter w;
  w.raw(std::string_view(kDatasetMagic, 4));
  w.u32(kDatasetFormatVersion);
  w.u32(static_cast<std::uint32_t>(ds.sensor_count));
  w.u32(static_cast<std::uint32_t>(ds.n_points));
  w.u64(ds.samples.size());
  w.u64(ds.seed);
  for (double v : {o.dx, o.dt, o.B, o.gamma, o.c, o.beta_hat0, o.u0, o.T, o.subsample,
                   o.sigma_low, o.sigma_high})
    w.f64(v);
  w.u64(ds.sigmas.size());
  w.f64s(ds.sigmas);
  for (const KernelSample& s : ds.samples) {
    w.u64(s.provenance.run_id);
    w.f64(s.provenance.sigma);
    w.f64(s.provenance.t);
    w.u32(s.provenance.blown_up ? kBlownUpFlag : 0);
    w.f64s(s.beta_hat);
    w.f64s(s.kernel);
  }
  const auto& body = w.bytes();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, body.data(), static_cast<uInt>(body.size())));
  w.u32(crc);
  write_file_bytes(path, w.bytes());
}

KernelDataset load_dataset(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (bytes.size() < 4) throw TruncatedFileError(path + ": file too short");
  if (r.raw(4) != std::string_view(kDatasetMagic, 4))
    throw BadMagicError(path + " is not a kernel dataset");
  const std::uint32_t version = r.u32();
  if (version != kDatasetFormatVersion)
    throw VersionMismatchError("dataset format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(kDatasetFormatVersion) + ")");
  KernelDataset ds;
  ds.sensor_count = r.u32();
  ds.n_points = r.u32();
  const std::uint64_t count = r.u64();
  ds.seed = r.u64();
  GenerateOptions& o = ds.options;
  for (double* v : {&o.dx, &o.dt, &o.B, &o.gamma, &o.c, &o.beta_hat0, &o.u0, &o.T, &o.subsample,
                    &o.sigma_low, &o.sigma_high})
    *v = r.f64();
  o.seed = ds.seed;
  const std::uint64_t runs = r.u64();
  if (runs > r.remaining() / 8) throw TruncatedFileError(path + ": run table is cut short");
  o.n_runs = runs;
  ds.sigmas.resize(runs);
  r.f64s(ds.sigmas);

  const std::size_t rec = record_size(ds);
  if (r.remaining() < 4 || count > (r.remaining() - 4) / rec)
    throw TruncatedFileError(path + ": expected " + std::to_string(count) + " samples");
  if (r.remaining() != count * rec + 4)
    throw FileFormatError(path + ": trailing bytes after the checksum");
  const std::size_t body = bytes.size() - 4;
  ByteReader trailer(std::span<const unsigned char>(bytes).subspan(body));
  const auto crc = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));
  if (trailer.u32() != crc) throw ChecksumError(path + ": CRC-32 mismatch");

  ds.samples.resize(count);
  for (KernelSample& s : ds.samples) {
    s.provenance.run_id = r.u64();
    s.provenance.sigma = r.f64();
    s.provenance.t = r.f64();
    s.provenance.blown_up = (r.u32() & kBlownUpFlag) != 0;
    s.beta_hat.resize(ds.sensor_count);
    s.kernel.resize(ds.n_points);
    r.f64s(s.beta_hat);
    r.f64s(s.kernel);
  }
  ds.validate();
  return ds;
}

void export_csv(const KernelDataset& ds, std::ostream& out) {
  out.precision(17);
  out << "run_id,sigma,t,blown_up";
  for (std::size_t j = 0; j < ds.sensor_count; ++j) out << ",beta_hat_" << j;
  for (std::size_t j = 0; j < ds.n_points; ++j) out << ",kernel_" << j;
  out << '\n';
  for (const KernelSample& s : ds.samples) {
    out << s.provenance.run_id << ',' << s.provenance.sigma << ',' << s.provenance.t << ','
        << (s.provenance.blown_up ? 1 : 0);
    for (double v : s.beta_hat) out << ',' << v;
    for (double v : s.kernel) out << ',' << v;
    out << '\n';
  }
}

KernelSample reproduce_sample(const KernelDataset& ds, std::size_t index) {
  const KernelSample& target = ds.samples.at(index);
  const RunOutput out = simulate_run(ds.options, target.provenance.run_id, target.provenance.sigma,
                                     target.provenance.t + ds.options.subsample);
  for (const KernelSample& s : out.samples)
    if (std::abs(s.provenance.t - target.provenance.t) < 0.5 * ds.options.dt) return s;
  throw std::runtime_error("sample time was not reached when re-running its run");
}

SpotCheckReport spot_check(const KernelDataset& ds, double fraction, std::uint64_t seed) {
  SpotCheckReport report;
  const double B = ds.options.B;
  const Grid1D grid = ds.grid();
  report.bound = 10.0 * grid.dx() * (1.0 + B * std::exp(B));
  if (ds.samples.empty()) return report;
  const auto n_check = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ds.samples.size()))));
  Rng rng(seed);
  for (std::size_t i = 0; i < n_check; ++i) {
    const KernelSample& s = ds.samples[rng.below(ds.samples.size())];
    const GridFunction beta_hat(grid, s.beta_hat);
    const GridFunction kernel(grid, s.kernel);
    report.max_residual =
        std::max(report.max_residual, sup_norm(kernel_residual(beta_hat, kernel)));
    ++report.checked;
  }
  report.passed = report.max_residual <= report.bound;
  return report;
}

}  // namespace backstep
