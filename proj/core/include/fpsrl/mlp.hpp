#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fpsrl/random.hpp"

namespace fpsrl {

/// Feed-forward regression network: affine + arctan hidden layers, linear
/// scalar output. Parameters are stored flat, layer by layer, as the weight
/// matrix (row-major, out x in) followed by the bias vector.
class Mlp {
 public:
  static constexpr std::size_t kMaxWidth = 32;

  Mlp() = default;
  /// sizes = {inputs, hidden..., 1}; all zero parameters.
  explicit Mlp(std::vector<std::size_t> sizes);

  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Mlp random(std::vector<std::size_t> sizes, Rng& rng);
  /// {inputs, width x hidden_layers, 1}
  static std::vector<std::size_t> shape(std::size_t inputs, std::size_t hidden_layers,
                                        std::size_t width = 10);

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t input_size() const noexcept { return sizes_.empty() ? 0 : sizes_.front(); }
  std::size_t hidden_layers() const noexcept { return sizes_.size() < 2 ? 0 : sizes_.size() - 2; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  double forward(std::span<const double> input) const;

  /// Row-major inputs (n x input_size) -> n outputs.
  void forward_batch(std::span<const double> inputs, std::span<double> outputs) const;

  /// d output / d parameters at `input`, written into `grad` (size parameter_count()).
  /// Returns the output.
  double output_gradient(std::span<const double> input, std::span<double> grad) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> params_;
};

/// Parameter-count formula for a layer-size list.
std::size_t mlp_parameter_count(const std::vector<std::size_t>& sizes);

/// Per-feature standardization with statistics from one data set.
struct Normalizer {
  static constexpr double kMinStd = 1e-12;

  std::vector<double> mean;
  std::vector<double> stddev;

  /// Rows of `features` values each; constant features get stddev 1.
  static Normalizer fit(std::span<const double> rows, std::size_t features);

  std::size_t size() const noexcept { return mean.size(); }
  double normalize(std::size_t i, double v) const { return (v - mean[i]) / stddev[i]; }
  double denormalize(std::size_t i, double z) const { return z * stddev[i] + mean[i]; }
  void normalize(std::span<double> row) const;
  void denormalize(std::span<double> row) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

/// Inputs/targets for one scalar regression problem.
struct Dataset {
  std::size_t inputs = 0;
  std::vector<double> x;  // row-major, size() x inputs
  std::vector<double> y;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * inputs, inputs}; }
  void add(std::span<const double> in, double target);
};

/// Mean squared error of `net` over `data`.
double mean_squared_error(const Mlp& net, const Dataset& data);

struct TrainConfig {
  std::size_t max_epochs = 3000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  /// Validation checks without improvement before the step size is halved.
  std::size_t patience = 25;
  /// Training stops after this many halvings.
  std::size_t max_decays = 8;
  /// Hard cap on mini-batch updates, whatever the data set size.
  std::size_t max_updates = 60000;
  /// Validation is checked once per epoch, or every this many updates if sooner.
  std::size_t max_updates_per_check = 250;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Mlp net;  // best-validation snapshot
  double train_mse = 0.0;
  double validation_mse = 0.0;
  double generalization_mse = 0.0;
  double final_validation_mse = 0.0;  // of the last parameters, not the snapshot
  std::size_t epochs = 0;
  std::size_t updates = 0;
};

/// Mini-batch gradient descent on squared error with per-parameter step
/// scaling by a moving RMS of the gradients (Adam). Keeps the parameters with
/// the lowest validation error. Throws ModelError if the loss diverges.
TrainResult train_mlp(Mlp net, const Dataset& train, const Dataset& validation,
                      const Dataset& generalization, const TrainConfig& config);

struct GradientCheckReport {
  bool passed = true;
  double worst_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  std::string message;
};

/// Analytic gradient, overridable so tests can inject a broken one.
using GradientFn = std::function<void(const Mlp&, std::span<const double>, std::span<double>)>;

/// Compares analytic parameter gradients with central finite differences.
GradientCheckReport gradient_check(const Mlp& net, std::span<const double> input,
                                   double tolerance = 1e-4, const GradientFn& analytic = {});

}  // namespace fpsrl
