#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fpsrl/dynamics.hpp"

namespace fpsrl {

/// One recorded environment step (s, a, s', r).
struct Transition {
  State s;
  double a = 0.0;
  State s_next;
  double r = 0.0;
  std::int64_t trajectory = 0;
  std::int64_t step = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class PolicyKind { UniformRandom, RandomWalk };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// A fixed set of transitions recorded with an exploration policy.
struct Batch {
  BenchmarkId benchmark = BenchmarkId::MountainCar;
  std::uint64_t seed = 0;
  PolicyKind policy_kind = PolicyKind::UniformRandom;
  std::size_t episode_len = 0;
  std::vector<Transition> transitions;

  std::size_t size() const noexcept { return transitions.size(); }
  friend bool operator==(const Batch&, const Batch&) = default;
};

inline constexpr int kBatchFormatVersion = 1;

/// Random-walk steps are uniform in +-this fraction of the action range.
inline constexpr double kRandomWalkStepFraction = 0.2;

/// Default exploration policy of a benchmark: uniform-random for the mountain
/// car, random walk for the cart-pole variants.
PolicyKind default_policy_kind(BenchmarkId id);
/// Default episode length: 200 (MC cap), 100 (CPB), 500 (CPSU).
std::size_t default_episode_len(BenchmarkId id);

/// Rolls out the exploration policy from data-region start states until
/// exactly `size` transitions are recorded. Every episode runs for
/// `episode_len` steps; a mountain car that reaches the goal keeps recording
/// absorbing transitions so the learned model sees them.
Batch generate_batch(const BenchmarkSpec& spec, std::size_t size, std::size_t episode_len,
                     PolicyKind kind, std::uint64_t seed);

/// Index of the first transition that disagrees with the true dynamics, or
/// size() when every (s', r) equals true_step(s, a) exactly.
std::size_t validate_batch(const BenchmarkSpec& spec, const Batch& batch);

void save_batch(const Batch& batch, const std::string& path);
/// Throws LoadError naming the offending line.
Batch load_batch(const std::string& path);

/// JSON Lines encoding used by save_batch.
std::string batch_to_jsonl(const Batch& batch);
Batch batch_from_jsonl(std::string_view contents, const std::string& origin);

/// Start-state set persistence, one record per state.
void save_states(const std::vector<State>& states, const std::string& path);
std::vector<State> load_states(const std::string& path);

}  // namespace fpsrl
