#include "backstep/deeponet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "backstep/binary_io.hpp"
#include "backstep/dataset.hpp"
#include "backstep/rng.hpp"

namespace backstep {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMatrix>;
using Weights = Eigen::Map<RowMatrix>;

constexpr char kModelMagic[] = "DONM";

struct LayerCache {
  // inputs[l] feeds layer l; the last entry is the network output.
  std::vector<Eigen::MatrixXd> activations;
};

void activate(Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::tanh)
    z = z.array().tanh();
  else
    z = z.cwiseMax(0.0);
}

Eigen::MatrixXd mlp_forward(const MlpSpec& spec, const double* params, const Eigen::MatrixXd& input,
                            LayerCache* cache) {
  const std::size_t layers = spec.layer_widths.size() - 1;
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(spec.layer_widths[l]);
    const auto out = static_cast<Eigen::Index>(spec.layer_widths[l + 1]);
    ConstWeights w(params, out, in);
    Eigen::Map<const Eigen::RowVectorXd> b(params + out * in, out);
    params += out * in + out;
    Eigen::MatrixXd z = h * w.transpose();
    z.rowwise() += b;
    if (l + 1 < layers) activate(z, spec.activation);
    h = std::move(z);
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

// Accumulates the parameter gradient for d(loss)/d(output) = d_out.
void mlp_backward(const MlpSpec& spec, const double* params, const LayerCache& cache,
                  Eigen::MatrixXd d_out, double* grad) {
  const std::size_t layers = spec.layer_widths.size() - 1;
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += spec.layer_widths[l + 1] * spec.layer_widths[l] + spec.layer_widths[l + 1];
  }
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(spec.layer_widths[l]);
    const auto out = static_cast<Eigen::Index>(spec.layer_widths[l + 1]);
    const Eigen::MatrixXd& h = cache.activations[l];
    Weights gw(grad + offsets[l], out, in);
    Eigen::Map<Eigen::RowVectorXd> gb(grad + offsets[l] + out * in, out);
    gw.noalias() += d_out.transpose() * h;
    gb += d_out.colwise().sum();
    if (l == 0) break;
    ConstWeights w(params + offsets[l], out, in);
    Eigen::MatrixXd d_h = d_out * w;
    if (spec.activation == Activation::tanh)
      d_h.array() *= 1.0 - h.array().square();
    else
      d_h.array() *= (h.array() > 0.0).cast<double>();
    d_out = std::move(d_h);
  }
}

void glorot_normal(const MlpSpec& spec, double* params, Rng& rng) {
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const std::size_t in = spec.layer_widths[l];
    const std::size_t out = spec.layer_widths[l + 1];
    const double stddev = std::sqrt(2.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < in * out; ++i) *params++ = stddev * rng.normal();
    for (std::size_t i = 0; i < out; ++i) *params++ = 0.0;
  }
}

Eigen::VectorXd grid_points(const Grid1D& grid) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) x[static_cast<Eigen::Index>(i)] = grid.x(i);
  return x;
}

// Normalized branch input row for the given channel functions.
Eigen::MatrixXd branch_input(const DeepOnetModel& model,
                             std::initializer_list<const GridFunction*> channels) {
  if (channels.size() != model.channels())
    throw std::invalid_argument("model expects " + std::to_string(model.channels()) +
                                " input functions");
  const std::vector<double> sensors = model.sensors();
  const std::size_t m = sensors.size();
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(m * channels.size()));
  std::size_t c = 0;
  for (const GridFunction* f : channels) {
    if (!f->all_finite()) throw std::invalid_argument("deeponet forward: non-finite input");
    const bool same = f->size() == m;
    for (std::size_t j = 0; j < m; ++j)
      row(0, static_cast<Eigen::Index>(c * m + j)) =
          model.input_scales[c] * (same ? (*f)[j] : interpolate(*f, sensors[j]));
    ++c;
  }
  return row;
}

GridFunction contract(const DeepOnetModel& model, const Eigen::MatrixXd& branch_out,
                      const Eigen::MatrixXd& trunk_out, const Grid1D& grid) {
  const Eigen::VectorXd k = trunk_out * branch_out.row(0).transpose();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = model.output_scale * (k[static_cast<Eigen::Index>(i)] + model.output_bias());
  return GridFunction(grid, std::move(values));
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
    count += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
  return count;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 3)
    throw std::invalid_argument("an MLP needs input, at least one hidden layer, and output");
  for (std::size_t w : layer_widths)
    if (w == 0) throw std::invalid_argument("MLP layer widths must be positive");
}

DeepOnetModel::DeepOnetModel(MlpSpec branch, MlpSpec trunk, std::size_t channels)
    : branch_(std::move(branch)), trunk_(std::move(trunk)), channels_(channels) {
  branch_.validate();
  trunk_.validate();
  if (channels_ == 0 || branch_.input_width() % channels_ != 0)
    throw std::invalid_argument("branch input width must be a multiple of the channel count");
  if (trunk_.input_width() != 1) throw std::invalid_argument("trunk input width must be 1");
  if (branch_.output_width() != trunk_.output_width())
    throw std::invalid_argument("branch and trunk output widths differ");
  params_.assign(branch_.parameter_count() + trunk_.parameter_count() + 1, 0.0);
  input_scales.assign(channels_, 1.0);
}

DeepOnetModel::DeepOnetModel(MlpSpec branch, MlpSpec trunk, std::size_t channels,
                             std::uint64_t seed)
    : DeepOnetModel(std::move(branch), std::move(trunk), channels) {
  seed_ = seed;
  Rng rng(seed);
  glorot_normal(branch_, params_.data(), rng);
  glorot_normal(trunk_, params_.data() + trunk_offset(), rng);
}

DeepOnetModel DeepOnetModel::zeros(MlpSpec branch, MlpSpec trunk, std::size_t channels) {
  return DeepOnetModel(std::move(branch), std::move(trunk), channels);
}

DeepOnetModel DeepOnetModel::default_kernel_model(std::size_t sensors, std::uint64_t seed) {
  return DeepOnetModel(MlpSpec{{sensors, 64, 64, 32}, Activation::tanh},
                       MlpSpec{{1, 32, 32, 32}, Activation::tanh}, 1, seed);
}

std::vector<double> DeepOnetModel::sensors() const {
  return GridFunction::sample(Grid1D(sensor_count()), [](double x) { return x; }).data();
}

Eigen::MatrixXd DeepOnetModel::branch_forward(const Eigen::MatrixXd& inputs) const {
  return mlp_forward(branch_, params_.data(), inputs, nullptr);
}

Eigen::MatrixXd DeepOnetModel::trunk_forward(const Eigen::VectorXd& x) const {
  return mlp_forward(trunk_, params_.data() + trunk_offset(), x, nullptr);
}

double DeepOnetModel::loss_and_gradient(const Eigen::MatrixXd& inputs,
                                        const Eigen::MatrixXd& targets, const Eigen::VectorXd& x,
                                        std::vector<double>& gradient) const {
  LayerCache branch_cache;
  LayerCache trunk_cache;
  const Eigen::MatrixXd b = mlp_forward(branch_, params_.data(), inputs, &branch_cache);
  const Eigen::MatrixXd t = mlp_forward(trunk_, params_.data() + trunk_offset(), x, &trunk_cache);

  Eigen::MatrixXd residual = b * t.transpose();
  residual.array() += output_bias();
  residual -= targets;
  const double count = static_cast<double>(residual.size());
  const double loss = residual.squaredNorm() / count;

  gradient.assign(params_.size(), 0.0);
  const Eigen::MatrixXd d_pred = (2.0 / count) * residual;
  mlp_backward(branch_, params_.data(), branch_cache, d_pred * t, gradient.data());
  mlp_backward(trunk_, params_.data() + trunk_offset(), trunk_cache, d_pred.transpose() * b,
               gradient.data() + trunk_offset());
  gradient.back() = d_pred.sum();
  return loss;
}

bool DeepOnetModel::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); }) &&
         std::isfinite(output_scale) &&
         std::all_of(input_scales.begin(), input_scales.end(),
                     [](double v) { return std::isfinite(v); });
}

GridFunction forward(const DeepOnetModel& model, const GridFunction& beta_hat) {
  if (!model.all_finite()) throw std::invalid_argument("deeponet forward: non-finite weights");
  const Eigen::MatrixXd b = model.branch_forward(branch_input(model, {&beta_hat}));
  const Eigen::MatrixXd t = model.trunk_forward(grid_points(beta_hat.grid()));
  return contract(model, b, t, beta_hat.grid());
}

GridFunction forward_derivative(const DeepOnetModel& model_k1, const GridFunction& beta_hat,
                                const GridFunction& beta_hat_t) {
  require_same_grid(beta_hat, beta_hat_t, "forward_derivative");
  if (!model_k1.all_finite()) throw std::invalid_argument("deeponet forward: non-finite weights");
  const Eigen::MatrixXd b = model_k1.branch_forward(branch_input(model_k1, {&beta_hat, &beta_hat_t}));
  const Eigen::MatrixXd t = model_k1.trunk_forward(grid_points(beta_hat.grid()));
  return contract(model_k1, b, t, beta_hat.grid());
}

NeuralKernelOperator::NeuralKernelOperator(std::shared_ptr<const DeepOnetModel> model,
                                           const Grid1D& grid)
    : model_(std::move(model)), grid_(grid) {
  if (!model_ || !model_->all_finite())
    throw std::invalid_argument("NeuralKernelOperator needs a finite model");
  if (model_->channels() != 1)
    throw std::invalid_argument("NeuralKernelOperator needs a single-channel model");
  trunk_basis_ = model_->trunk_forward(grid_points(grid_));
}

GridFunction NeuralKernelOperator::operator()(const GridFunction& beta_hat) const {
  if (!(beta_hat.grid() == grid_))
    throw std::invalid_argument("NeuralKernelOperator: beta_hat is not on the bound grid");
  const Eigen::MatrixXd b = model_->branch_forward(branch_input(*model_, {&beta_hat}));
  return contract(*model_, b, trunk_basis_, grid_);
}

TrainingDivergedError::TrainingDivergedError(int epoch)
    : std::runtime_error("training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
      epoch_(epoch) {}

EvalReport evaluate(const DeepOnetModel& model, const TrainingSet& data,
                    const std::vector<std::size_t>& rows) {
  EvalReport report;
  if (rows.empty()) return report;
  const Eigen::VectorXd x = grid_points(data.target_grid);
  const Eigen::MatrixXd t = model.trunk_forward(x);
  double err_sq = 0.0;
  double ref_sq = 0.0;
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, rows.size() - start);
    std::vector<Eigen::Index> idx(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                  rows.begin() + static_cast<std::ptrdiff_t>(start + count));
    Eigen::MatrixXd in = data.inputs(idx, Eigen::all);
    for (std::size_t c = 0; c < model.channels(); ++c)
      in.middleCols(static_cast<Eigen::Index>(c * model.sensor_count()),
                    static_cast<Eigen::Index>(model.sensor_count())) *= model.input_scales[c];
    Eigen::MatrixXd pred = model.branch_forward(in) * t.transpose();
    pred.array() += model.output_bias();
    pred *= model.output_scale;
    const Eigen::MatrixXd y = data.targets(idx, Eigen::all);
    const Eigen::MatrixXd err = pred - y;
    err_sq += err.squaredNorm();
    ref_sq += y.squaredNorm();
    for (Eigen::Index r = 0; r < err.rows(); ++r) {
      const double scale = y.row(r).cwiseAbs().maxCoeff();
      if (scale > 0.0)
        report.max_pointwise_rel =
            std::max(report.max_pointwise_rel, err.row(r).cwiseAbs().maxCoeff() / scale);
    }
  }
  report.rel_l2 = ref_sq > 0.0 ? std::sqrt(err_sq / ref_sq) : std::sqrt(err_sq);
  return report;
}

TrainReport train(const TrainingSet& data, DeepOnetModel& model, const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto n_rows = static_cast<std::size_t>(data.inputs.rows());
  if (n_rows == 0) throw std::invalid_argument("train: empty dataset");
  if (data.targets.rows() != data.inputs.rows() || data.family.size() != n_rows)
    throw std::invalid_argument("train: inputs, targets and family ids disagree in length");
  if (static_cast<std::size_t>(data.inputs.cols()) != model.branch().input_width())
    throw std::invalid_argument("train: input width does not match the branch net");
  if (static_cast<std::size_t>(data.targets.cols()) != data.target_grid.size())
    throw std::invalid_argument("train: target width does not match the target grid");
  if (data.input_bounds.size() != model.channels())
    throw std::invalid_argument("train: need one input bound per channel");
  if (options.epochs < 1 || options.batch_size == 0 || !(options.learning_rate > 0.0))
    throw std::invalid_argument("train: epochs, batch size and learning rate must be positive");

  TrainReport report;
  report.rng_seed = options.seed;
  Rng rng(options.seed);

  // Hold out whole families.
  const std::set<std::uint64_t> family_ids(data.family.begin(), data.family.end());
  std::vector<std::uint64_t> families(family_ids.begin(), family_ids.end());
  std::set<std::uint64_t> test_set;
  if (families.size() >= 2 && options.test_fraction > 0.0) {
    auto n_test = static_cast<std::size_t>(
        std::llround(options.test_fraction * static_cast<double>(families.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, families.size() - 1);
    rng.shuffle(families);
    test_set.insert(families.begin(), families.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  report.test_families.assign(test_set.begin(), test_set.end());
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t r = 0; r < n_rows; ++r)
    (test_set.count(data.family[r]) ? test_rows : train_rows).push_back(r);
  report.test_is_holdout = !test_rows.empty();
  if (test_rows.empty()) test_rows = train_rows;
  report.train_samples = train_rows.size();
  report.test_samples = report.test_is_holdout ? test_rows.size() : 0;

  for (std::size_t c = 0; c < model.channels(); ++c) {
    if (!(data.input_bounds[c] > 0.0)) throw std::invalid_argument("train: input bound must be > 0");
    model.input_scales[c] = 1.0 / data.input_bounds[c];
  }
  double target_max = 0.0;
  for (std::size_t r : train_rows)
    target_max = std::max(target_max, data.targets.row(static_cast<Eigen::Index>(r)).cwiseAbs().maxCoeff());
  model.output_scale = target_max > 0.0 ? target_max : 1.0;

  Eigen::MatrixXd inputs = data.inputs;
  const auto m = static_cast<Eigen::Index>(model.sensor_count());
  for (std::size_t c = 0; c < model.channels(); ++c)
    inputs.middleCols(static_cast<Eigen::Index>(c) * m, m) *= model.input_scales[c];
  const Eigen::MatrixXd targets = data.targets / model.output_scale;
  const Eigen::VectorXd x = grid_points(data.target_grid);

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::span<double> params = model.parameters();
  std::vector<double> first(params.size(), 0.0);
  std::vector<double> second(params.size(), 0.0);
  std::vector<double> grad;
  long long adam_step = 0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double lr = options.learning_rate * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * epoch / static_cast<double>(options.epochs)));
    rng.shuffle(train_rows);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < train_rows.size(); begin += options.batch_size) {
      const std::size_t end = std::min(begin + options.batch_size, train_rows.size());
      std::vector<Eigen::Index> idx(train_rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                    train_rows.begin() + static_cast<std::ptrdiff_t>(end));
      const double loss = model.loss_and_gradient(inputs(idx, Eigen::all), targets(idx, Eigen::all),
                                                  x, grad);
      if (!std::isfinite(loss)) throw TrainingDivergedError(epoch);
      ++adam_step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        first[i] = kBeta1 * first[i] + (1.0 - kBeta1) * grad[i];
        second[i] = kBeta2 * second[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        params[i] -= lr * (first[i] / c1) / (std::sqrt(second[i] / c2) + kEps);
      }
      loss_sum += loss;
      ++batches;
    }
    report.final_train_loss = loss_sum / static_cast<double>(batches);
    report.epochs_run = epoch + 1;
    if (options.on_epoch) options.on_epoch(epoch, report.final_train_loss);
  }

  std::sort(train_rows.begin(), train_rows.end());
  const EvalReport train_eval = evaluate(model, data, train_rows);
  const EvalReport test_eval = evaluate(model, data, test_rows);
  report.final_train_rel_l2 = train_eval.rel_l2;
  report.final_test_rel_l2 = test_eval.rel_l2;
  report.test_max_pointwise_rel = test_eval.max_pointwise_rel;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainingSet to_training_set(const KernelDataset& dataset) {
  if (dataset.samples.empty()) throw std::invalid_argument("empty kernel dataset");
  TrainingSet set;
  const auto rows = static_cast<Eigen::Index>(dataset.samples.size());
  set.inputs.resize(rows, static_cast<Eigen::Index>(dataset.sensor_count));
  set.targets.resize(rows, static_cast<Eigen::Index>(dataset.n_points));
  set.family.reserve(dataset.samples.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const KernelSample& s = dataset.samples[static_cast<std::size_t>(r)];
    set.inputs.row(r) = Eigen::Map<const Eigen::RowVectorXd>(s.beta_hat.data(), set.inputs.cols());
    set.targets.row(r) = Eigen::Map<const Eigen::RowVectorXd>(s.kernel.data(), set.targets.cols());
    set.family.push_back(s.provenance.run_id);
  }
  set.target_grid = Grid1D(dataset.n_points);
  set.input_bounds = {dataset.options.B};
  return set;
}

TrainReport train(const KernelDataset& dataset, DeepOnetModel& model, const TrainOptions& options) {
  if (model.channels() != 1 || model.sensor_count() != dataset.sensor_count)
    throw std::invalid_argument("model sensors do not match the dataset");
  return train(to_training_set(dataset), model, options);
}

void save_model(const DeepOnetModel& model, const std::string& path) {
  ByteWriter w;
  w.raw(std::string_view(kModelMagic, 4));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.sensor_count()));
  w.u32(static_cast<std::uint32_t>(model.latent_size()));
  w.u32(static_cast<std::uint32_t>(model.channels()));
  for (const MlpSpec* spec : {&model.branch(), &model.trunk()}) {
    w.u32(static_cast<std::uint32_t>(spec->layer_widths.size()));
    for (std::size_t width : spec->layer_widths) w.u32(static_cast<std::uint32_t>(width));
    w.u32(static_cast<std::uint32_t>(spec->activation));
  }
  w.f64s(model.input_scales);
  w.f64(model.output_scale);
  w.u64(model.seed());
  w.u64(model.parameter_count());
  w.f64s(model.parameters());
  write_file_bytes(path, w.bytes());
}

DeepOnetModel load_model(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (r.raw(4) != std::string_view(kModelMagic, 4))
    throw BadMagicError(path + " is not a model file");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw VersionMismatchError("model format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(kModelFormatVersion) + ")");
  const std::uint32_t m = r.u32();
  const std::uint32_t p = r.u32();
  const std::uint32_t channels = r.u32();
  MlpSpec specs[2];
  for (MlpSpec& spec : specs) {
    const std::uint32_t layers = r.u32();
    if (layers > 64) throw FileFormatError("implausible layer count in " + path);
    for (std::uint32_t i = 0; i < layers; ++i) spec.layer_widths.push_back(r.u32());
    const std::uint32_t act = r.u32();
    if (act > 1) throw FileFormatError("unknown activation id in " + path);
    spec.activation = static_cast<Activation>(act);
  }
  DeepOnetModel model = DeepOnetModel::zeros(specs[0], specs[1], channels);
  if (model.sensor_count() != m || model.latent_size() != p)
    throw FileFormatError("model header is inconsistent with its layer widths");
  r.f64s(model.input_scales);
  model.output_scale = r.f64();
  const std::uint64_t seed = r.u64();
  if (r.u64() != model.parameter_count())
    throw FileFormatError("model parameter count does not match its layer widths");
  r.f64s(model.parameters());
  if (r.remaining() != 0) throw FileFormatError("trailing bytes in " + path);
  model.set_seed(seed);
  return model;
}

std::string describe_model(const DeepOnetModel& model) {
  auto widths = [](const MlpSpec& s) {
    std::ostringstream o;
    for (std::size_t i = 0; i < s.layer_widths.size(); ++i) o << (i ? " " : "") << s.layer_widths[i];
    return o.str();
  };
  std::ostringstream out;
  out << "format_version: " << kModelFormatVersion << '\n'
      << "sensors: " << model.sensor_count() << '\n'
      << "latent_size: " << model.latent_size() << '\n'
      << "channels: " << model.channels() << '\n'
      << "branch_widths: " << widths(model.branch()) << '\n'
      << "trunk_widths: " << widths(model.trunk()) << '\n'
      << "activation: " << to_string(model.branch().activation) << '\n';
  out << "input_scales:";
  for (double s : model.input_scales) out << ' ' << s;
  out << '\n'
      << "output_scale: " << model.output_scale << '\n'
      << "seed: " << model.seed() << '\n'
      << "parameters: " << model.parameter_count() << '\n';
  return out.str();
}

}  // namespace backstep
