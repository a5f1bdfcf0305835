#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpsrl/data.hpp"
#include "fpsrl/dynamics.hpp"

namespace fpsrl {

/// Pipeline stages that own a random stream.
enum class SeedStage { Data, Model, Swarm, TrainStates, TestStates };

/// Every knob of one experiment. Defaults come from `defaults_for`.
struct ExperimentConfig {
  BenchmarkId benchmark = BenchmarkId::MountainCar;

  // [data]
  std::size_t batch_size = 10000;
  std::size_t episode_len = 200;
  PolicyKind exploration = PolicyKind::UniformRandom;

  // [model]
  std::vector<std::size_t> depths{1, 2, 3};
  std::size_t width = 10;
  std::size_t epochs = 3000;
  std::size_t minibatch = 64;
  double learning_rate = 1e-2;
  std::size_t max_updates = 60000;

  // [swarm]
  std::size_t particles = 100;
  std::size_t iterations = 1000;
  std::size_t radius = 1;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;

  // [policy]
  std::size_t rules = 2;
  bool symmetric = false;
  int horizon = 200;
  double q = 0.05;
  std::size_t train_states = 100;
  std::size_t test_states = 100;
  /// Swing-up success: consecutive goal-region states at the end of a rollout.
  std::size_t success_hold = 50;

  // [thresholds]
  double min_fitness = -43.0;
  double min_success_rate = 0.0;

  // [seeds]
  std::uint64_t master_seed = 1;
  std::optional<std::uint64_t> data_seed, model_seed, swarm_seed, train_states_seed,
      test_states_seed;

  // [run]
  std::string out_dir;
  std::size_t threads = 1;

  /// Seed of a stage: the explicit one if set, otherwise derived from the master seed.
  std::uint64_t seed(SeedStage stage) const;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Built-in settings of each benchmark.
ExperimentConfig defaults_for(BenchmarkId id);

/// INI-style text; keys missing from the text keep the benchmark defaults.
/// The benchmark is taken from [experiment] benchmark unless `benchmark` is given.
ExperimentConfig parse_config(const std::string& text, std::optional<BenchmarkId> benchmark = {});
ExperimentConfig load_config(const std::string& path, std::optional<BenchmarkId> benchmark = {});

/// Writes every field; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// Hex fingerprint of the emitted configuration, ignoring out_dir and threads.
std::string config_hash(const ExperimentConfig& config);

}  // namespace fpsrl
