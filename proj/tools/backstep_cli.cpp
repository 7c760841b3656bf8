// backstep: simulate, generate datasets, train, benchmark, inspect.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "backstep/bench.hpp"
#include "backstep/binary_io.hpp"
#include "backstep/config.hpp"
#include "backstep/dataset.hpp"
#include "backstep/deeponet.hpp"
#include "backstep/plant.hpp"

namespace fs = std::filesystem;
using namespace backstep;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "key = value configuration file");
  cmd->add_option("-s,--set", o.overrides, "override, e.g. --set controller.gamma=0.5")
      ->take_all();
  cmd->add_option("-o,--output", o.output, "output directory (run.output)");
  cmd->add_flag("-f,--force", o.force, "overwrite an existing manifest");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_hash(const std::string& path) { return git_blob_sha1(read_file_bytes(path)); }

struct Loaded {
  ExperimentConfig cfg;
  Manifest manifest;
};

Loaded load_config(const std::string& command, const CommonOptions& o) {
  ConfigMap map;
  if (!o.config_path.empty()) map = ConfigMap::load(o.config_path);
  for (const std::string& a : o.overrides) map.assign(a);
  if (!o.output.empty()) map.set("run.output", o.output);
  Loaded l{ExperimentConfig::from(map), {}};
  l.manifest.command = command;
  l.manifest.config = l.cfg.to_map();
  if (!o.config_path.empty()) l.manifest.inputs.emplace_back(o.config_path, file_hash(o.config_path));
  return l;
}

std::shared_ptr<const DeepOnetModel> require_model(Loaded& l, const char* why) {
  if (l.cfg.model_path.empty()) throw ConfigError(std::string("run.model: required ") + why);
  auto model = std::make_shared<const DeepOnetModel>(load_model(l.cfg.model_path));
  l.manifest.inputs.emplace_back(l.cfg.model_path, file_hash(l.cfg.model_path));
  return model;
}

KernelDataset require_dataset(Loaded& l, const char* why) {
  if (l.cfg.dataset_path.empty()) throw ConfigError(std::string("run.dataset: required ") + why);
  KernelDataset ds = load_dataset(l.cfg.dataset_path);
  l.manifest.inputs.emplace_back(l.cfg.dataset_path, file_hash(l.cfg.dataset_path));
  return ds;
}

int cmd_simulate(const CommonOptions& o) {
  Loaded l = load_config("simulate", o);
  const ExperimentConfig& cfg = l.cfg;
  ControllerSpec spec;
  spec.kind = cfg.kind;
  spec.gamma = cfg.gamma;
  spec.c = cfg.c;
  spec.gamma0 = cfg.gamma0;
  const PlantConfig plant = cfg.plant();
  spec.beta_hat0 = GridFunction::constant(plant.grid, cfg.beta_hat0);
  if (cfg.kind == ControllerKind::no_lyapunov || cfg.kind == ControllerKind::no_passive)
    spec.kernel_operator =
        std::make_shared<NeuralKernelOperator>(require_model(l, "by neural controllers"), plant.grid);

  prepare_output_dir(cfg.output_dir, o.force);
  const Trajectory traj = run_closed_loop(plant, spec, cfg.T, cfg.sample_every);
  traj.write_csv(cfg.output_dir);

  const ScalarSample& last = traj.scalars.back();
  double beta_hat_max = 0.0;
  for (const ScalarSample& s : traj.scalars) beta_hat_max = std::max(beta_hat_max, s.beta_hat_sup);
  l.manifest.results = {{"blew_up", traj.blew_up ? "true" : "false"},
                        {"final_t", num(last.t)},
                        {"final_u_l2", num(last.u_l2)},
                        {"final_u_sup", num(last.u_sup)},
                        {"max_beta_hat_sup", num(beta_hat_max)}};
  if (traj.blew_up) l.manifest.results.emplace_back("blowup_time", num(traj.blowup_time));
  l.manifest.write(cfg.output_dir);

  std::cout << to_string(cfg.kind) << ": t=" << last.t << " ||u||=" << last.u_l2
            << " sup|u|=" << last.u_sup << '\n';
  if (traj.blew_up) {
    std::cerr << "blow-up at t=" << traj.blowup_time << "; partial outputs in " << cfg.output_dir
              << '\n';
    return kExitBlowUp;
  }
  return kExitOk;
}

int cmd_dataset(const CommonOptions& o) {
  Loaded l = load_config("dataset", o);
  prepare_output_dir(l.cfg.output_dir, o.force);
  const KernelDataset ds = generate(l.cfg.dataset);
  const fs::path out = fs::path(l.cfg.output_dir) / "dataset.kds";
  save_dataset(ds, out.string());
  const SpotCheckReport check = spot_check(ds, 0.01, ds.seed);
  std::size_t flagged = 0;
  for (const KernelSample& s : ds.samples) flagged += s.provenance.blown_up ? 1 : 0;
  l.manifest.results = {{"samples", std::to_string(ds.samples.size())},
                        {"blown_up_samples", std::to_string(flagged)},
                        {"spot_check_max_residual", num(check.max_residual)},
                        {"dataset", out.string()},
                        {"dataset_hash", file_hash(out.string())}};
  l.manifest.write(l.cfg.output_dir);
  std::cout << "wrote " << ds.samples.size() << " samples to " << out.string() << '\n';
  if (!check.passed) {
    std::cerr << "kernel residual spot-check failed: " << check.max_residual << '\n';
    return kExitBlowUp;
  }
  return kExitOk;
}

int cmd_export_csv(const std::string& in, const std::string& out) {
  const KernelDataset ds = load_dataset(in);
  std::ofstream file(out);
  if (!file) throw IoError("cannot write " + out);
  export_csv(ds, file);
  if (!file) throw IoError("error writing " + out);
  std::cout << "exported " << ds.samples.size() << " samples to " << out << '\n';
  return kExitOk;
}

int cmd_train(const CommonOptions& o, bool quiet) {
  Loaded l = load_config("train", o);
  const KernelDataset ds = require_dataset(l, "for training");
  prepare_output_dir(l.cfg.output_dir, o.force);
  DeepOnetModel model = DeepOnetModel::default_kernel_model(ds.sensor_count, l.cfg.train.seed);
  TrainOptions opts = l.cfg.train;
  if (!quiet)
    opts.on_epoch = [&](int epoch, double loss) {
      if ((epoch + 1) % 50 == 0 || epoch == 0)
        std::cout << "epoch " << epoch + 1 << "/" << opts.epochs << " loss " << loss << std::endl;
    };
  const TrainReport r = train(ds, model, opts);
  const fs::path out = fs::path(l.cfg.output_dir) / "model.don";
  save_model(model, out.string());

  std::string families;
  for (auto f : r.test_families) families += (families.empty() ? "" : ",") + std::to_string(f);
  l.manifest.results = {{"epochs_run", std::to_string(r.epochs_run)},
                        {"parameters", std::to_string(model.parameter_count())},
                        {"final_train_loss", num(r.final_train_loss)},
                        {"final_train_rel_l2", num(r.final_train_rel_l2)},
                        {"final_test_rel_l2", num(r.final_test_rel_l2)},
                        {"test_max_pointwise_rel", num(r.test_max_pointwise_rel)},
                        {"test_families", families},
                        {"rng_seed", std::to_string(r.rng_seed)},
                        {"model", out.string()},
                        {"model_hash", file_hash(out.string())}};
  l.manifest.write(l.cfg.output_dir);
  std::cout << "parameters " << model.parameter_count() << ", train rel L2 "
            << r.final_train_rel_l2 << ", test rel L2 " << r.final_test_rel_l2
            << ", wall time " << r.wall_time_s << " s\n";
  return kExitOk;
}

int cmd_bench(const CommonOptions& o) {
  Loaded l = load_config("bench", o);
  const auto model = require_model(l, "for benchmarking");
  std::optional<GridFunction> coarse;
  if (!l.cfg.dataset_path.empty()) {
    const KernelDataset ds = require_dataset(l, "");
    const std::size_t index = l.cfg.bench_sample < 0
                                  ? ds.samples.size() / 2
                                  : static_cast<std::size_t>(l.cfg.bench_sample);
    if (index >= ds.samples.size()) throw ConfigError("bench.sample: index out of range");
    coarse = GridFunction(Grid1D(ds.sensor_count), ds.samples[index].beta_hat);
  }
  const double beta_hat0 = l.cfg.beta_hat0;
  const BetaFamily family = [&](const Grid1D& grid) {
    return coarse ? resample(*coarse, grid) : GridFunction::constant(grid, beta_hat0);
  };
  prepare_output_dir(l.cfg.output_dir, o.force);
  BenchOptions opts;
  opts.n_repeats = l.cfg.bench_repeats;
  const std::vector<BenchResult> results = run_bench(l.cfg.bench_dx, model, family, opts);

  const fs::path csv = fs::path(l.cfg.output_dir) / "bench.csv";
  std::ofstream out(csv);
  write_bench_csv(out, results);
  if (!out) throw IoError("cannot write " + csv.string());
  std::ostringstream table;
  write_bench_table(table, results);
  std::ofstream(fs::path(l.cfg.output_dir) / "bench.txt") << table.str();
  std::cout << table.str();
  for (const BenchResult& r : results)
    l.manifest.results.emplace_back("speedup_dx_" + num(r.dx), num(r.speedup));
  l.manifest.write(l.cfg.output_dir);
  return kExitOk;
}

int cmd_inspect(const std::string& path) {
  std::cout << describe_model(load_model(path));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive backstepping with exact and neural-operator gain kernels"};
  app.require_subcommand(1);

  CommonOptions sim_opts, data_opts, train_opts, bench_opts;
  bool quiet = false;
  std::string model_path, export_in, export_out;

  CLI::App* simulate = app.add_subcommand("simulate", "run one closed-loop simulation");
  add_common(simulate, sim_opts);

  CLI::App* dataset = app.add_subcommand("dataset", "generate a kernel dataset");
  add_common(dataset, data_opts);
  dataset->require_subcommand(0, 1);
  CLI::App* export_cmd = dataset->add_subcommand("export-csv", "flatten a .kds file to CSV");
  export_cmd->add_option("input", export_in, "dataset file")->required();
  export_cmd->add_option("output", export_out, "CSV file")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "train the DeepONet kernel model");
  add_common(train_cmd, train_opts);
  train_cmd->add_flag("-q,--quiet", quiet, "no per-epoch progress");

  CLI::App* bench = app.add_subcommand("bench", "time exact vs. neural kernels");
  add_common(bench, bench_opts);

  CLI::App* model = app.add_subcommand("model", "model file utilities");
  model->require_subcommand(1);
  CLI::App* inspect = model->add_subcommand("inspect", "print a model header");
  inspect->add_option("path", model_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts);
    if (*export_cmd) return cmd_export_csv(export_in, export_out);
    if (*dataset) return cmd_dataset(data_opts);
    if (*train_cmd) return cmd_train(train_opts, quiet);
    if (*bench) return cmd_bench(bench_opts);
    if (*inspect) return cmd_inspect(model_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FileFormatError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const BenchGateError& e) {
    std::cerr << e.what() << '\n';
    return kExitBlowUp;
  } catch (const TrainingDivergedError& e) {
    std::cerr << e.what() << '\n';
    return kExitBlowUp;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
