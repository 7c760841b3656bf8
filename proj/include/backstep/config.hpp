#pragma once

// Sectioned key = value configuration, experiment settings, and run manifests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "backstep/bench.hpp"
#include "backstep/dataset.hpp"
#include "backstep/deeponet.hpp"
#include "backstep/plant.hpp"

namespace backstep {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitBlowUp = 2, kExitIo = 3 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "section.key" -> value map. Lines are `[section]`, `key = value`,
/// blank, or comments starting with '#' or ';'.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text, const std::string& origin = "<string>");
  static ConfigMap load(const std::filesystem::path& path);

  /// Applies "section.key=value"; later assignments win.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the first key outside `known`.
  void require_known(std::span<const std::string> known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  // plant
  double dx = 1e-2;
  double dt = 5e-3;
  double sigma = 2.9;
  double u0 = 1.0;
  double B = 5.0;
  // controller
  ControllerKind kind = ControllerKind::exact_lyapunov;
  double gamma = 1e-2;
  double c = 1.0;
  double gamma0 = 1.0;
  double beta_hat0 = 1.0;
  // run
  double T = 13.0;
  double sample_every = 0.1;
  std::uint64_t seed = 0;
  std::string model_path;
  std::string dataset_path;
  std::string output_dir = "out";

  GenerateOptions dataset;
  TrainOptions train;
  std::vector<double> bench_dx{1e-2, 1e-3, 5e-4, 1e-4};
  int bench_repeats = 100;
  std::int64_t bench_sample = -1;  ///< dataset sample used as bench input; -1 = middle

  /// Throws ConfigError naming the offending key.
  static ExperimentConfig from(const ConfigMap& map);
  static const std::vector<std::string>& known_keys();

  PlantConfig plant() const;
  /// Every effective setting as "section.key" -> value.
  std::map<std::string, std::string> to_map() const;
};

/// Git blob object id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(std::span<const unsigned char> content);
std::string git_blob_sha1(const std::string& content);

/// Creates dir; throws IoError if it already holds a manifest and force is false.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  /// (path, blob hash) of every input file.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> results;

  std::string render() const;
  void write(const std::filesystem::path& dir) const;
};

}  // namespace backstep
