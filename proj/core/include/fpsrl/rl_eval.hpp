#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpsrl/dynamics.hpp"
#include "fpsrl/fuzzy.hpp"
#include "fpsrl/worldmodel.hpp"

namespace fpsrl {

/// gamma = q^(1 / (T - 1)). Throws ContractViolation unless q in [0, 1] and T > 1.
double discount_from_q(double q, int horizon);

/// Something that advances many states by one control interval at once.
/// Implementations must be safe to call concurrently.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const BenchmarkSpec& spec() const = 0;
  virtual void step_batch(std::span<const State> states, std::span<const double> actions,
                          std::span<State> next, std::span<double> rewards) const = 0;
  /// "true" or "model"; used in reports.
  virtual std::string name() const = 0;
};

/// The benchmark's own dynamics, absorbing states included.
class TrueEnvironment final : public Environment {
 public:
  explicit TrueEnvironment(BenchmarkSpec spec) : spec_(std::move(spec)) {}
  const BenchmarkSpec& spec() const override { return spec_; }
  void step_batch(std::span<const State> states, std::span<const double> actions,
                  std::span<State> next, std::span<double> rewards) const override;
  std::string name() const override { return "true"; }

 private:
  BenchmarkSpec spec_;
};

/// A learned world model. Rollouts never stop early.
class ModelEnvironment final : public Environment {
 public:
  explicit ModelEnvironment(WorldModel model)
      : model_(std::move(model)), spec_(BenchmarkSpec::for_id(model_.benchmark)) {}
  const BenchmarkSpec& spec() const override { return spec_; }
  const WorldModel& model() const { return model_; }
  void step_batch(std::span<const State> states, std::span<const double> actions,
                  std::span<State> next, std::span<double> rewards) const override;
  std::string name() const override { return "model"; }

 private:
  WorldModel model_;
  BenchmarkSpec spec_;
};

/// Raised when an environment fails in the middle of a rollout.
class RolloutError : public Error {
 public:
  RolloutError(std::size_t step, const std::string& what, int exit_code)
      : Error("rollout failed at step " + std::to_string(step) + ": " + what, exit_code),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

using Policy = std::function<double(const State&)>;

/// Called after every step with the step index k and the states s_{k+1}.
using StepObserver = std::function<void(std::size_t, std::span<const State>)>;

/// Discounted T-step returns from every start state, all advanced in lockstep.
std::vector<double> rollout_returns(const Environment& env, const Policy& policy,
                                    std::span<const State> starts, int horizon, double gamma,
                                    const StepObserver& observer = {});

/// Single-trajectory convenience wrapper.
double rollout_return(const Environment& env, const Policy& policy, const State& start,
                      int horizon, double gamma);

/// Same, for a fuzzy policy (avoids std::function dispatch per state).
std::vector<double> rollout_returns(const Environment& env, const FuzzyPolicyParams& policy,
                                    std::span<const State> starts, int horizon, double gamma,
                                    const StepObserver& observer = {});

struct EvaluationSpec {
  int horizon = 200;
  double q = 0.05;
  std::vector<State> starts;
  /// Empty means uniform weights.
  std::vector<double> weights;
  const Environment* env = nullptr;

  double gamma() const { return discount_from_q(q, horizon); }
  void validate() const;
};

/// Weighted mean of the returns.
double weighted_fitness(std::span<const double> returns, std::span<const double> weights);

/// Policy decoding settings shared by every fitness call.
struct PolicyEncoding {
  std::size_t state_dim = 2;
  SymmetrySpec symmetry{};
  double scale = 1.0;
};

/// Decodes x and averages its returns over spec.starts. Any failure yields -infinity.
double fitness(std::span<const double> x, const PolicyEncoding& encoding,
               const EvaluationSpec& spec);

/// True when a trajectory s_0 .. s_T counts as a success.
using TrajectoryPredicate = std::function<bool(std::span<const State>)>;

/// MC: reaches the goal. CPB: never fails. CPSU: inside the goal region for
/// each of the last `hold` states.
TrajectoryPredicate default_success_predicate(const BenchmarkSpec& spec, std::size_t hold = 50);

/// Fraction of start states whose trajectory satisfies the predicate.
double success_rate(const Environment& env, const Policy& policy, std::span<const State> starts,
                    int horizon, const TrajectoryPredicate& predicate);

/// Linear-interpolation quantile of unsorted values, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct EvaluationReport {
  std::string target;  // "true" or "model"
  std::vector<double> returns;
  std::vector<char> successes;
  double fitness = 0.0;
  double success_rate = 0.0;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

/// Evaluates one policy on every start state and summarizes the returns.
EvaluationReport evaluate_policy(const Environment& env, const FuzzyPolicyParams& policy,
                                 std::span<const State> starts, int horizon, double q,
                                 const TrajectoryPredicate& predicate);

/// One record per start state, then a summary record.
std::string to_jsonl(const EvaluationReport& report);

/// Human-readable summary lines.
std::string format_report(const EvaluationReport& report);

}  // namespace fpsrl
