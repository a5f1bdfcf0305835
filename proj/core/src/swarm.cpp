#include "fpsrl/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fpsrl/error.hpp"
#include "fpsrl/text_format.hpp"

namespace fpsrl {

namespace {

constexpr std::uint64_t kInitStream = 0;

double safe_fitness(const FitnessFn& f, std::span<const double> x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Evaluates fitness of every particle's current position, optionally in parallel.
void evaluate_all(const FitnessFn& f, const std::vector<Particle>& swarm,
                  std::vector<double>& out, std::size_t threads) {
  const std::size_t n = swarm.size();
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = safe_fitness(f, swarm[i].position);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) out[i] = safe_fitness(f, swarm[i].position);
    });
  }
}

IterationRecord summarize(std::size_t iteration, const std::vector<Particle>& swarm,
                          const std::vector<double>& current) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.best_fitness = -std::numeric_limits<double>::infinity();
  for (const auto& p : swarm) rec.best_fitness = std::max(rec.best_fitness, p.best_fitness);
  double sum = 0.0;
  std::size_t finite = 0;
  for (double v : current) {
    if (std::isfinite(v)) {
      sum += v;
      ++finite;
    }
  }
  rec.mean_fitness = finite ? sum / static_cast<double>(finite)
                            : -std::numeric_limits<double>::infinity();
  return rec;
}

}  // namespace

std::vector<double> SwarmConfig::velocity_max() const {
  std::vector<double> v(lower.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = 0.1 * (upper[j] - lower[j]);
  return v;
}

void SwarmConfig::validate() const {
  if (particles < 1) throw ConfigError("swarm needs at least one particle");
  if (cognitive < 0.0 || social < 0.0) throw ConfigError("acceleration constants must be >= 0");
  if (lower.empty() || lower.size() != upper.size())
    throw ConfigError("search box bounds must be nonempty and of equal length");
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j]))
      throw ConfigError("search box dimension " + std::to_string(j) + " has x_min >= x_max");
}

std::size_t neighborhood_best(std::span<const Particle> swarm, std::size_t i, std::size_t radius) {
  const std::size_t n = swarm.size();
  if (i >= n) throw ContractViolation("neighborhood_best: particle index out of range");
  std::size_t best = i;
  const std::size_t span = std::min(radius, n / 2);
  for (std::size_t off = 0; off <= 2 * span; ++off) {
    const std::size_t j = (i + n - span + off) % n;
    const double fj = swarm[j].best_fitness;
    const double fb = swarm[best].best_fitness;
    if (fj > fb || (fj == fb && j < best)) best = j;
  }
  return best;
}

std::vector<double> velocity_update(const Particle& p, std::span<const double> nbest,
                                    const SwarmConfig& config, std::span<const double> r1,
                                    std::span<const double> r2) {
  const std::size_t d = p.position.size();
  if (nbest.size() != d || r1.size() != d || r2.size() != d || config.dim() != d)
    throw ContractViolation("velocity_update: dimension mismatch");
  std::vector<double> v(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double vmax = 0.1 * (config.upper[j] - config.lower[j]);
    const double raw = config.inertia * p.velocity[j] +
                       config.cognitive * r1[j] * (p.best_position[j] - p.position[j]) +
                       config.social * r2[j] * (nbest[j] - p.position[j]);
    v[j] = std::min(vmax, std::max(-vmax, raw));
  }
  return v;
}

std::vector<double> velocity_update(const Particle& p, std::span<const double> nbest,
                                    const SwarmConfig& config, Rng& rng) {
  const std::size_t d = p.position.size();
  std::vector<double> r1(d), r2(d);
  for (std::size_t j = 0; j < d; ++j) {
    r1[j] = rng.uniform();
    r2[j] = rng.uniform();
  }
  return velocity_update(p, nbest, config, r1, r2);
}

std::vector<double> position_update(const Particle& p, const SwarmConfig& config) {
  const std::size_t d = p.position.size();
  if (p.velocity.size() != d || config.dim() != d)
    throw ContractViolation("position_update: dimension mismatch");
  std::vector<double> x(d);
  for (std::size_t j = 0; j < d; ++j)
    x[j] = std::min(config.upper[j], std::max(config.lower[j], p.position[j] + p.velocity[j]));
  return x;
}

bool personal_best_update(Particle& p, double fitness) {
  if (!std::isfinite(fitness)) return false;
  if (fitness > p.best_fitness) {
    p.best_position = p.position;
    p.best_fitness = fitness;
    return true;
  }
  return false;
}

std::string to_json_line(const IterationRecord& r) {
  return "{\"iteration\":" + std::to_string(r.iteration) +
         ",\"best_fitness\":" + text::number(r.best_fitness) +
         ",\"mean_fitness\":" + text::number(r.mean_fitness) + "}";
}

PsoResult pso_optimize(const FitnessFn& fitness, const SwarmConfig& config,
                       const PsoCallbacks& callbacks) {
  config.validate();
  const std::size_t n = config.particles;
  const std::size_t d = config.dim();

  std::vector<Particle> swarm(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::derive(config.seed, {kInitStream, i});
    auto& p = swarm[i];
    p.position.resize(d);
    for (std::size_t j = 0; j < d; ++j) p.position[j] = rng.uniform(config.lower[j], config.upper[j]);
    p.velocity.assign(d, 0.0);
    p.best_position = p.position;
  }

  std::vector<double> current(n);
  evaluate_all(fitness, swarm, current, config.threads);
  for (std::size_t i = 0; i < n; ++i)
    swarm[i].best_fitness = std::isfinite(current[i]) ? current[i]
                                                      : -std::numeric_limits<double>::infinity();

  PsoResult result;
  result.history.push_back(summarize(0, swarm, current));
  if (callbacks.on_iteration) callbacks.on_iteration(result.history.back());

  std::vector<std::size_t> nbest(n);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) nbest[i] = neighborhood_best(swarm, i, config.radius);
    // Neighbourhood bests refer to personal bests, which do not change until
    // every particle has moved, so a snapshot of the indices suffices.
    std::vector<std::vector<double>> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = swarm[nbest[i]].best_position;
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = Rng::derive(config.seed, {it, i});
      auto& p = swarm[i];
      p.velocity = velocity_update(p, targets[i], config, rng);
      p.position = position_update(p, config);
    }
    evaluate_all(fitness, swarm, current, config.threads);
    for (std::size_t i = 0; i < n; ++i) personal_best_update(swarm[i], current[i]);

    result.history.push_back(summarize(it, swarm, current));
    if (callbacks.on_swarm) callbacks.on_swarm(swarm);
    if (callbacks.on_iteration) callbacks.on_iteration(result.history.back());
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (swarm[i].best_fitness > swarm[best].best_fitness) best = i;
  result.best_position = swarm[best].best_position;
  result.best_fitness = swarm[best].best_fitness;
  return result;
}

}  // namespace fpsrl
