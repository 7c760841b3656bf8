#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "backstep/binary_io.hpp"
#include "backstep/dataset.hpp"

using namespace backstep;

namespace {

GenerateOptions tiny(std::size_t runs = 2, double T = 0.1) {
  GenerateOptions o;
  o.n_runs = runs;
  o.T = T;
  o.seed = 42;
  o.threads = 1;
  return o;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("backstep_dataset_" + name);
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void dump(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Generate, SampleCountFromHorizon) {
  const KernelDataset ds = generate(tiny(1, 0.02));
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.samples[0].provenance.t, 0.0);
  EXPECT_NEAR(ds.samples[1].provenance.t, 0.01, 1e-12);
  EXPECT_EQ(ds.sensor_count, 101u);
  EXPECT_EQ(ds.n_points, 101u);
  for (double v : ds.samples[0].beta_hat) EXPECT_EQ(v, 1.0);
}

TEST(Generate, SigmasInRangeAndRunsOrdered) {
  const KernelDataset ds = generate(tiny(3, 0.05));
  ASSERT_EQ(ds.sigmas.size(), 3u);
  for (double s : ds.sigmas) {
    EXPECT_GE(s, 2.7);
    EXPECT_LT(s, 3.2);
  }
  EXPECT_EQ(ds.samples.size(), 15u);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(ds.samples[i].provenance.run_id, i / 5);
    EXPECT_EQ(ds.samples[i].provenance.sigma, ds.sigmas[i / 5]);
  }
}

TEST(Generate, DeterministicAcrossThreadCounts) {
  GenerateOptions o = tiny(3, 0.05);
  const KernelDataset a = generate(o);
  o.threads = 3;
  const KernelDataset b = generate(o);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].beta_hat, b.samples[i].beta_hat);
    EXPECT_EQ(a.samples[i].kernel, b.samples[i].kernel);
  }
}

TEST(Generate, RejectsBadOptions) {
  GenerateOptions o = tiny();
  o.n_runs = 0;
  EXPECT_THROW(generate(o), std::invalid_argument);
  o = tiny();
  o.subsample = 0.0075;
  EXPECT_THROW(generate(o), std::invalid_argument);
  o = tiny();
  o.dt = 0.02;
  EXPECT_THROW(generate(o), std::invalid_argument);
}

TEST(DatasetFile, BitwiseRoundTrip) {
  const KernelDataset ds = generate(tiny());
  const auto p1 = temp_file("rt1.kds");
  const auto p2 = temp_file("rt2.kds");
  save_dataset(ds, p1.string());
  const KernelDataset back = load_dataset(p1.string());
  save_dataset(back, p2.string());
  EXPECT_EQ(slurp(p1), slurp(p2));
  ASSERT_EQ(back.samples.size(), ds.samples.size());
  EXPECT_EQ(back.sigmas, ds.sigmas);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.options.gamma, ds.options.gamma);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].kernel, ds.samples[i].kernel);
    EXPECT_EQ(back.samples[i].provenance.t, ds.samples[i].provenance.t);
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST(DatasetFile, DetectsCorruption) {
  const KernelDataset ds = generate(tiny(1, 0.02));
  const auto p = temp_file("bad.kds");
  save_dataset(ds, p.string());
  const auto good = slurp(p);

  auto flipped = good;
  flipped[flipped.size() / 2] ^= 0x10;
  dump(p, flipped);
  EXPECT_THROW(load_dataset(p.string()), ChecksumError);

  auto newer = good;
  newer[4] = 9;
  dump(p, newer);
  EXPECT_THROW(load_dataset(p.string()), VersionMismatchError);

  dump(p, std::vector<char>(good.begin(), good.end() - 100));
  EXPECT_THROW(load_dataset(p.string()), TruncatedFileError);

  auto magic = good;
  magic[0] = 'X';
  dump(p, magic);
  EXPECT_THROW(load_dataset(p.string()), BadMagicError);

  auto longer = good;
  longer.push_back(0);
  dump(p, longer);
  EXPECT_THROW(load_dataset(p.string()), FileFormatError);

  std::filesystem::remove(p);
  EXPECT_THROW(load_dataset(p.string()), std::runtime_error);
}

TEST(DatasetFile, RefusesDuplicateKeys) {
  KernelDataset ds = generate(tiny(1, 0.02));
  ds.samples[1].provenance.t = ds.samples[0].provenance.t;
  EXPECT_THROW(save_dataset(ds, temp_file("dup.kds").string()), std::invalid_argument);
}

TEST(Reproduce, MatchesStoredSample) {
  const KernelDataset ds = generate(tiny(2, 0.1));
  for (std::size_t i : {0u, 7u, 14u}) {
    const KernelSample s = reproduce_sample(ds, i);
    for (std::size_t j = 0; j < ds.n_points; ++j) {
      EXPECT_NEAR(s.kernel[j], ds.samples[i].kernel[j], 1e-12);
      EXPECT_NEAR(s.beta_hat[j], ds.samples[i].beta_hat[j], 1e-12);
    }
  }
}

TEST(SpotCheck, StoredKernelsSatisfyTheirEquation) {
  const KernelDataset ds = generate(tiny(2, 0.1));
  const SpotCheckReport rep = spot_check(ds, 0.5, 1);
  EXPECT_EQ(rep.checked, 10u);
  EXPECT_TRUE(rep.passed);
  EXPECT_LE(rep.max_residual, 1e-10);

  KernelDataset broken = ds;
  for (auto& s : broken.samples) s.kernel[50] += 1e6;
  EXPECT_FALSE(spot_check(broken, 1.0, 1).passed);
}

TEST(ExportCsv, HeaderAndRows) {
  const KernelDataset ds = generate(tiny(1, 0.02));
  std::ostringstream out;
  export_csv(ds, out);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("run_id,sigma,t,blown_up,beta_hat_0,", 0), 0u);
  EXPECT_NE(header.find(",kernel_100"), std::string::npos);
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4 + 2 * 101 - 1);
  }
  EXPECT_EQ(rows, 2);
}

TEST(GenerationThreads, EnvironmentCap) {
  setenv("BACKSTEP_NO_THREADS", "1", 1);
  EXPECT_EQ(generation_threads(8), 1u);
  unsetenv("BACKSTEP_NO_THREADS");
  EXPECT_EQ(generation_threads(3), 3u);
}
