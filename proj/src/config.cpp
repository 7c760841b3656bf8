#include "backstep/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace backstep {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text, const std::string& origin) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    map.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void ConfigMap::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

std::uint64_t ConfigMap::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const std::string& text = it->second;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

void ConfigMap::require_known(std::span<const std::string> known) const {
  for (const auto& [key, value] : values_)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(key + ": unknown configuration key");
}

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "plant.dx", "plant.dt", "plant.sigma", "plant.u0", "plant.B",
      "controller.kind", "controller.gamma", "controller.c", "controller.gamma0",
      "controller.beta_hat0",
      "run.T", "run.sample_every", "run.seed", "run.model", "run.dataset", "run.output",
      "dataset.n_runs", "dataset.sigma_low", "dataset.sigma_high", "dataset.T",
      "dataset.subsample", "dataset.gamma", "dataset.seed", "dataset.threads",
      "train.epochs", "train.lr", "train.batch_size", "train.seed", "train.test_fraction",
      "bench.dx", "bench.repeats", "bench.sample"};
  return keys;
}

ExperimentConfig ExperimentConfig::from(const ConfigMap& map) {
  map.require_known(known_keys());
  ExperimentConfig c;
  c.dx = map.get_double("plant.dx", c.dx);
  c.dt = map.get_double("plant.dt", c.dt);
  c.sigma = map.get_double("plant.sigma", c.sigma);
  c.u0 = map.get_double("plant.u0", c.u0);
  c.B = map.get_double("plant.B", c.B);
  c.kind = parse_controller_kind(map.get_string("controller.kind", to_string(c.kind)));
  c.gamma = map.get_double("controller.gamma", c.gamma);
  c.c = map.get_double("controller.c", c.c);
  c.gamma0 = map.get_double("controller.gamma0", c.gamma0);
  c.beta_hat0 = map.get_double("controller.beta_hat0", c.beta_hat0);
  c.T = map.get_double("run.T", c.T);
  c.sample_every = map.get_double("run.sample_every", c.sample_every);
  c.seed = map.get_uint("run.seed", c.seed);
  c.model_path = map.get_string("run.model", c.model_path);
  c.dataset_path = map.get_string("run.dataset", c.dataset_path);
  c.output_dir = map.get_string("run.output", c.output_dir);

  GenerateOptions& d = c.dataset;
  d.n_runs = map.get_uint("dataset.n_runs", d.n_runs);
  d.sigma_low = map.get_double("dataset.sigma_low", d.sigma_low);
  d.sigma_high = map.get_double("dataset.sigma_high", d.sigma_high);
  d.T = map.get_double("dataset.T", d.T);
  d.subsample = map.get_double("dataset.subsample", d.subsample);
  d.gamma = map.get_double("dataset.gamma", d.gamma);
  d.seed = map.get_uint("dataset.seed", c.seed);
  d.threads = map.get_uint("dataset.threads", d.threads);
  d.dx = c.dx;
  d.dt = c.dt;
  d.B = c.B;
  d.c = c.c;
  d.beta_hat0 = c.beta_hat0;
  d.u0 = c.u0;

  TrainOptions& t = c.train;
  t.epochs = static_cast<int>(map.get_uint("train.epochs", static_cast<std::uint64_t>(t.epochs)));
  t.learning_rate = map.get_double("train.lr", t.learning_rate);
  t.batch_size = map.get_uint("train.batch_size", t.batch_size);
  t.seed = map.get_uint("train.seed", c.seed);
  t.test_fraction = map.get_double("train.test_fraction", t.test_fraction);

  c.bench_dx = map.get_doubles("bench.dx", c.bench_dx);
  c.bench_repeats = static_cast<int>(map.get_uint("bench.repeats", 100));
  const double sample = map.get_double("bench.sample", -1.0);
  if (sample < -1.0 || sample != std::floor(sample))
    throw ConfigError("bench.sample: expected a sample index or -1");
  c.bench_sample = static_cast<std::int64_t>(sample);

  if (!(c.dt > 0.0)) throw ConfigError("plant.dt: must be positive");
  if (c.dt > c.dx * (1.0 + 1e-12))
    throw ConfigError("plant.dt: CFL violation, dt = " + fmt(c.dt) + " exceeds dx = " + fmt(c.dx));
  try {
    Grid1D::with_spacing(c.dx);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("plant.dx: ") + e.what());
  }
  if (!(c.B > 0.0)) throw ConfigError("plant.B: must be positive");
  if (!(c.gamma > 0.0)) throw ConfigError("controller.gamma: must be positive");
  if (!(c.c > 0.0)) throw ConfigError("controller.c: must be positive");
  if (!(c.gamma0 > 0.0)) throw ConfigError("controller.gamma0: must be positive");
  if (std::abs(c.beta_hat0) > c.B) throw ConfigError("controller.beta_hat0: exceeds plant.B");
  if (!(c.T > 0.0)) throw ConfigError("run.T: must be positive");
  if (c.sample_every < c.dt * (1.0 - 1e-9)) throw ConfigError("run.sample_every: must be >= dt");
  if (c.bench_repeats < 2) throw ConfigError("bench.repeats: must be at least 2");
  if (t.epochs < 1) throw ConfigError("train.epochs: must be positive");
  if (t.batch_size == 0) throw ConfigError("train.batch_size: must be positive");
  if (!(t.learning_rate > 0.0)) throw ConfigError("train.lr: must be positive");
  if (!(t.test_fraction >= 0.0 && t.test_fraction < 1.0))
    throw ConfigError("train.test_fraction: must lie in [0, 1)");
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PlantConfig ExperimentConfig::plant() const {
  const Grid1D grid = Grid1D::with_spacing(dx);
  return PlantConfig{grid, dt, chebyshev_beta(grid, sigma, B), GridFunction::constant(grid, u0), B};
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::string dx_list;
  for (double v : bench_dx) dx_list += (dx_list.empty() ? "" : ",") + fmt(v);
  return {
      {"plant.dx", fmt(dx)}, {"plant.dt", fmt(dt)}, {"plant.sigma", fmt(sigma)},
      {"plant.u0", fmt(u0)}, {"plant.B", fmt(B)},
      {"controller.kind", to_string(kind)}, {"controller.gamma", fmt(gamma)},
      {"controller.c", fmt(c)}, {"controller.gamma0", fmt(gamma0)},
      {"controller.beta_hat0", fmt(beta_hat0)},
      {"run.T", fmt(T)}, {"run.sample_every", fmt(sample_every)},
      {"run.seed", std::to_string(seed)}, {"run.model", model_path},
      {"run.dataset", dataset_path}, {"run.output", output_dir},
      {"dataset.n_runs", std::to_string(dataset.n_runs)},
      {"dataset.sigma_low", fmt(dataset.sigma_low)}, {"dataset.sigma_high", fmt(dataset.sigma_high)},
      {"dataset.T", fmt(dataset.T)}, {"dataset.subsample", fmt(dataset.subsample)},
      {"dataset.gamma", fmt(dataset.gamma)}, {"dataset.seed", std::to_string(dataset.seed)},
      {"train.epochs", std::to_string(train.epochs)}, {"train.lr", fmt(train.learning_rate)},
      {"train.batch_size", std::to_string(train.batch_size)},
      {"train.seed", std::to_string(train.seed)},
      {"train.test_fraction", fmt(train.test_fraction)},
      {"bench.dx", dx_list}, {"bench.repeats", std::to_string(bench_repeats)},
      {"bench.sample", std::to_string(bench_sample)}};
}

std::string git_blob_sha1(std::span<const unsigned char> content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    const unsigned char b = digest[i];
    out += kHex[b >> 4];
    out += kHex[b & 0xF];
  }
  return out;
}

std::string git_blob_sha1(const std::string& content) {
  return git_blob_sha1(std::span(reinterpret_cast<const unsigned char*>(content.data()),
                                 content.size()));
}

void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  if (std::filesystem::exists(dir / "manifest") && !force)
    throw IoError(dir.string() + " already holds a manifest; pass --force to overwrite");
}

std::string Manifest::render() const {
  std::ostringstream out;
  out << "command = " << command << "\n\n[config]\n";
  for (const auto& [k, v] : config) out << k << " = " << v << '\n';
  out << "\n[inputs]\n";
  for (const auto& [path, hash] : inputs) out << path << " = " << hash << '\n';
  out << "\n[results]\n";
  for (const auto& [k, v] : results) out << k << " = " << v << '\n';
  return out.str();
}

void Manifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest", std::ios::binary);
  out << render();
  if (!out) throw IoError("cannot write " + (dir / "manifest").string());
}

}  // namespace backstep
