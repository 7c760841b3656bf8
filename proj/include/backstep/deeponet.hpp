#pragma once

// DeepONet neural operator: branch MLP over sensor samples of beta_hat,
// trunk MLP over x, output sum_k branch_k * trunk_k + bias.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "backstep/kernel_operator.hpp"
#include "backstep/numerics.hpp"

namespace backstep {

struct KernelDataset;

enum class Activation : std::uint32_t { tanh = 0, relu = 1 };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Layer widths from input to output; one activation for every hidden layer,
/// the output layer is linear.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::tanh;

  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t parameter_count() const;
  void validate() const;
};

class DeepOnetModel {
 public:
  /// Glorot-normal weights, zero biases. channels > 1 stacks several input
  /// functions sampled at the same sensors in the branch input.
  DeepOnetModel(MlpSpec branch, MlpSpec trunk, std::size_t channels, std::uint64_t seed);

  /// All parameters zero.
  static DeepOnetModel zeros(MlpSpec branch, MlpSpec trunk, std::size_t channels = 1);

  /// branch [m -> 64 -> 64 -> 32], trunk [1 -> 32 -> 32 -> 32], tanh.
  static DeepOnetModel default_kernel_model(std::size_t sensors, std::uint64_t seed);

  const MlpSpec& branch() const { return branch_; }
  const MlpSpec& trunk() const { return trunk_; }
  std::size_t channels() const { return channels_; }
  std::size_t sensor_count() const { return branch_.input_width() / channels_; }
  std::size_t latent_size() const { return branch_.output_width(); }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// Uniform sensor locations on [0,1].
  std::vector<double> sensors() const;

  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  double output_bias() const { return params_.back(); }

  /// Network input = raw value * input_scales[channel]; kernel = network output * output_scale.
  std::vector<double> input_scales;
  double output_scale = 1.0;

  /// Branch outputs for normalized inputs, one row per sample (rows x p).
  Eigen::MatrixXd branch_forward(const Eigen::MatrixXd& inputs) const;
  /// Trunk outputs at the given points (points x p).
  Eigen::MatrixXd trunk_forward(const Eigen::VectorXd& x) const;

  /// Mean squared error of the normalized outputs against normalized targets
  /// (rows x x.size()), with its gradient in parameter order.
  double loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                           const Eigen::VectorXd& x, std::vector<double>& gradient) const;

  bool all_finite() const;

 private:
  DeepOnetModel(MlpSpec branch, MlpSpec trunk, std::size_t channels);
  std::size_t trunk_offset() const { return branch_.parameter_count(); }

  MlpSpec branch_;
  MlpSpec trunk_;
  std::size_t channels_;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

/// k_hat on beta_hat's grid. beta_hat is resampled to the sensors by linear
/// interpolation when the grids differ; the trunk is evaluated at every grid point.
GridFunction forward(const DeepOnetModel& model, const GridFunction& beta_hat);

/// Two-channel model approximating K1(beta_hat, beta_hat_t).
GridFunction forward_derivative(const DeepOnetModel& model_k1, const GridFunction& beta_hat,
                                const GridFunction& beta_hat_t);

/// A model bound to one grid: the trunk basis is evaluated once at
/// construction, so each call costs one branch pass plus an (n x p) product.
class NeuralKernelOperator final : public KernelOperator {
 public:
  NeuralKernelOperator(std::shared_ptr<const DeepOnetModel> model, const Grid1D& grid);

  GridFunction operator()(const GridFunction& beta_hat) const override;
  std::string name() const override { return "deeponet"; }
  const DeepOnetModel& model() const { return *model_; }

 private:
  std::shared_ptr<const DeepOnetModel> model_;
  Grid1D grid_;
  Eigen::MatrixXd trunk_basis_;  // n x p
};

/// Supervised pairs: raw inputs (rows x channels*m) and raw targets
/// (rows x n) sampled on target_grid; family ids drive the train/test split.
struct TrainingSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::vector<std::uint64_t> family;
  Grid1D target_grid{2};
  /// Bound used for input normalization, one per channel.
  std::vector<double> input_bounds;
};

struct TrainOptions {
  int epochs = 2000;
  double learning_rate = 2e-3;  ///< peak rate; cosine decay to zero over the run
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;   ///< fraction of families held out
  /// Called after every epoch with (epoch, mean training loss).
  std::function<void(int, double)> on_epoch;
};

struct TrainReport {
  int epochs_run = 0;
  double final_train_rel_l2 = 0.0;
  double final_test_rel_l2 = 0.0;
  /// max over test samples of max_x |k_hat - k| / sup |k|.
  double test_max_pointwise_rel = 0.0;
  double final_train_loss = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t rng_seed = 0;
  std::vector<std::uint64_t> test_families;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  bool test_is_holdout = true;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  explicit TrainingDivergedError(int epoch);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Adam (0.9, 0.999, 1e-8) on mean squared error. Sets the model's scaling
/// from the data: inputs by 1/bound, outputs by the largest |target| in the
/// training split. Deterministic for a fixed seed.
TrainReport train(const TrainingSet& data, DeepOnetModel& model, const TrainOptions& options);

/// Kernel dataset overload: beta_hat at the sensors -> kernel on the grid.
TrainReport train(const KernelDataset& dataset, DeepOnetModel& model, const TrainOptions& options);

TrainingSet to_training_set(const KernelDataset& dataset);

/// Aggregate relative L2 error sqrt(sum |pred - y|^2 / sum |y|^2) of the model
/// over the given rows of a training set.
struct EvalReport {
  double rel_l2 = 0.0;
  double max_pointwise_rel = 0.0;
};
EvalReport evaluate(const DeepOnetModel& model, const TrainingSet& data,
                    const std::vector<std::size_t>& rows);

/// Versioned little-endian model file.
void save_model(const DeepOnetModel& model, const std::string& path);
DeepOnetModel load_model(const std::string& path);

/// One-line-per-field header description and parameter count.
std::string describe_model(const DeepOnetModel& model);

constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace backstep
