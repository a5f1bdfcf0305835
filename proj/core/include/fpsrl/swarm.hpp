#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fpsrl/random.hpp"

namespace fpsrl {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
};

/// Inertia-weight PSO on a ring topology. Velocity bounds are derived from
/// the search box: v_max = 0.1 * (x_max - x_min).
struct SwarmConfig {
  std::size_t particles = 100;
  std::size_t iterations = 1000;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::size_t radius = 1;  // ring neighbours on each side
  std::vector<double> lower;
  std::vector<double> upper;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t dim() const noexcept { return lower.size(); }
  std::vector<double> velocity_max() const;
  void validate() const;
};

/// Index of the best personal best among ring members i-k..i+k (mod N),
/// particle i included. Ties go to the lowest index.
std::size_t neighborhood_best(std::span<const Particle> swarm, std::size_t i, std::size_t radius);

/// w v + c1 r1 (y - x) + c2 r2 (yhat - x), truncated to the velocity box.
/// r1 and r2 hold one uniform draw per dimension.
std::vector<double> velocity_update(const Particle& p, std::span<const double> neighborhood_best,
                                    const SwarmConfig& config, std::span<const double> r1,
                                    std::span<const double> r2);

/// Same update with fresh r1, r2 ~ U(0, 1) per dimension from `rng`.
std::vector<double> velocity_update(const Particle& p, std::span<const double> neighborhood_best,
                                    const SwarmConfig& config, Rng& rng);

/// clamp(x + v, x_min, x_max) using the particle's (already updated) velocity.
std::vector<double> position_update(const Particle& p, const SwarmConfig& config);

/// Accepts the current position iff its fitness is strictly better. Non-finite
/// fitness counts as -infinity. Returns whether the personal best moved.
bool personal_best_update(Particle& p, double fitness);

struct IterationRecord {
  std::size_t iteration = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;  // over finite fitness values of the current positions
};

/// One line-delimited progress record.
std::string to_json_line(const IterationRecord& record);

struct PsoResult {
  std::vector<double> best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> history;  // entry 0 is the initial swarm
};

using FitnessFn = std::function<double(std::span<const double>)>;

struct PsoCallbacks {
  std::function<void(const IterationRecord&)> on_iteration;
  std::function<void(std::span<const Particle>)> on_swarm;  // after every update phase
};

/// Runs the synchronous ring-topology PSO for config.iterations iterations and
/// returns the best personal best. The fitness function may be called from
/// several threads at once when config.threads > 1.
PsoResult pso_optimize(const FitnessFn& fitness, const SwarmConfig& config,
                       const PsoCallbacks& callbacks = {});

}  // namespace fpsrl
