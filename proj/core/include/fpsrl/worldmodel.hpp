#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpsrl/data.hpp"
#include "fpsrl/dynamics.hpp"
#include "fpsrl/mlp.hpp"

namespace fpsrl {

/// Index sets of the 80/10/10 split.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> generalization;
};

/// Splits whole trajectories (batch.transitions carry trajectory ids) so no
/// episode leaks across sets. Validation and generalization each receive
/// floor(10%) of the trajectories, training the rest.
DatasetSplit split_dataset(const Batch& batch, std::uint64_t seed);

/// Scalar regressor with its own input standardization and target scaling.
struct RegressionNet {
  Mlp net;
  Normalizer input;
  double target_mean = 0.0;
  double target_std = 1.0;

  /// Raw (denormalized) prediction for a raw input row.
  double predict(std::span<const double> raw_input) const;

  friend bool operator==(const RegressionNet&, const RegressionNet&) = default;
};

struct DepthReport {
  std::size_t hidden_layers = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  double generalization_mse = 0.0;
  std::size_t epochs = 0;
  std::size_t updates = 0;
};

/// Errors of every trained depth for one network; `best` indexes `depths`.
struct NetworkReport {
  std::string name;
  std::vector<DepthReport> depths;
  std::size_t best = 0;
};

/// Normalized-unit errors of all networks of a world model.
struct SplitReport {
  std::vector<NetworkReport> networks;  // D delta networks, then reward
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t generalization_size = 0;
};

/// One delta network per state variable plus a reward network r(s, a, s').
struct WorldModel {
  BenchmarkId benchmark = BenchmarkId::MountainCar;
  std::size_t state_dim = 0;
  int wrapped_dim = -1;
  std::vector<RegressionNet> deltas;
  RegressionNet reward;
  SplitReport report;
};

struct ModelStepResult {
  State next;
  double reward = 0.0;
};

/// s'_j = s_j + delta_j(s, a); r = reward(s, a, s') on the predicted s'.
ModelStepResult model_step(const WorldModel& model, const State& s, double action);

/// Same as model_step for many states at once.
void model_step_batch(const WorldModel& model, std::span<const State> states,
                      std::span<const double> actions, std::span<State> next,
                      std::span<double> rewards);

struct WorldModelTrainConfig {
  std::vector<std::size_t> depths{1, 2, 3};
  std::size_t width = 10;
  TrainConfig train{};
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// The regression problems a batch defines: (s, a) -> delta s_j for each j,
/// and (s, a, s') -> r. Angle deltas are wrapped for benchmarks with a
/// wrapping coordinate.
std::vector<Dataset> world_model_datasets(const Batch& batch, int wrapped_dim);

/// Names used in reports: "theta", "theta_dot", ..., "r".
std::vector<std::string> world_model_network_names(BenchmarkId id);

/// Trains every depth for every network and keeps the depth with the lowest
/// generalization error per network.
WorldModel train_world_model(const Batch& batch, const WorldModelTrainConfig& config);

/// Fits standardization on the training rows and trains one network.
RegressionNet fit_regression(const Dataset& data, const DatasetSplit& split,
                             const std::vector<std::size_t>& sizes, const TrainConfig& train,
                             std::uint64_t seed, DepthReport* report);

inline constexpr int kModelFormatVersion = 1;

void save_world_model(const WorldModel& model, const std::string& path);
/// Validates dimensions against the benchmark's spec.
WorldModel load_world_model(const std::string& path);

/// Fixed-width table: one row per network, one column per depth, best marked '*'.
std::string format_split_report(const SplitReport& report);

}  // namespace fpsrl
