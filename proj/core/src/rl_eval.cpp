#include "fpsrl/rl_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "fpsrl/text_format.hpp"

namespace fpsrl {

double discount_from_q(double q, int horizon) {
  if (horizon <= 1) throw ContractViolation("discount_from_q: horizon must be > 1");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation("discount_from_q: q must lie in [0, 1]");
  return std::pow(q, 1.0 / static_cast<double>(horizon - 1));
}

void TrueEnvironment::step_batch(std::span<const State> states, std::span<const double> actions,
                                 std::span<State> next, std::span<double> rewards) const {
  for (std::size_t k = 0; k < states.size(); ++k) {
    const StepResult r = true_step(spec_, states[k], actions[k]);
    next[k] = r.next;
    rewards[k] = r.reward;
  }
}

void ModelEnvironment::step_batch(std::span<const State> states, std::span<const double> actions,
                                  std::span<State> next, std::span<double> rewards) const {
  model_step_batch(model_, states, actions, next, rewards);
}

namespace {

template <class ActionFn>
std::vector<double> rollout_impl(const Environment& env, ActionFn&& act,
                                 std::span<const State> starts, int horizon, double gamma,
                                 const StepObserver& observer) {
  if (horizon < 1) throw ContractViolation("rollout: horizon must be >= 1");
  const std::size_t n = starts.size();
  std::vector<State> s(starts.begin(), starts.end()), next(n);
  std::vector<double> a(n), r(n), ret(n, 0.0);
  double discount = 1.0;
  for (int k = 0; k < horizon; ++k) {
    try {
      for (std::size_t i = 0; i < n; ++i) a[i] = act(s[i]);
      env.step_batch(s, a, next, r);
    } catch (const Error& e) {
      throw RolloutError(static_cast<std::size_t>(k), e.what(), e.exit_code());
    }
    for (std::size_t i = 0; i < n; ++i) ret[i] += discount * r[i];
    discount *= gamma;
    std::swap(s, next);
    if (observer) observer(static_cast<std::size_t>(k), s);
  }
  return ret;
}

}  // namespace

std::vector<double> rollout_returns(const Environment& env, const Policy& policy,
                                    std::span<const State> starts, int horizon, double gamma,
                                    const StepObserver& observer) {
  return rollout_impl(env, policy, starts, horizon, gamma, observer);
}

std::vector<double> rollout_returns(const Environment& env, const FuzzyPolicyParams& policy,
                                    std::span<const State> starts, int horizon, double gamma,
                                    const StepObserver& observer) {
  return rollout_impl(
      env, [&policy](const State& s) { return policy_output(policy, s); }, starts, horizon, gamma,
      observer);
}

double rollout_return(const Environment& env, const Policy& policy, const State& start,
                      int horizon, double gamma) {
  return rollout_returns(env, policy, {&start, 1}, horizon, gamma).front();
}

void EvaluationSpec::validate() const {
  if (!env) throw ContractViolation("evaluation needs an environment");
  if (starts.empty()) throw ContractViolation("evaluation needs at least one start state");
  (void)gamma();
  if (!weights.empty()) {
    if (weights.size() != starts.size())
      throw ContractViolation("one weight per start state is required");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ContractViolation("start-state weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ContractViolation("start-state weights must sum to 1");
  }
}

double weighted_fitness(std::span<const double> returns, std::span<const double> weights) {
  if (returns.empty()) throw ContractViolation("fitness of an empty start-state set");
  if (weights.empty())
    return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  double f = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) f += weights[i] * returns[i];
  return f;
}

double fitness(std::span<const double> x, const PolicyEncoding& encoding,
               const EvaluationSpec& spec) {
  constexpr double kFail = -std::numeric_limits<double>::infinity();
  try {
    spec.validate();
    const FuzzyPolicyParams policy =
        decode_policy(x, encoding.state_dim, encoding.symmetry, encoding.scale);
    const auto returns = rollout_returns(*spec.env, policy, spec.starts, spec.horizon, spec.gamma());
    const double f = weighted_fitness(returns, spec.weights);
    return std::isfinite(f) ? f : kFail;
  } catch (const std::exception&) {
    return kFail;
  }
}

TrajectoryPredicate default_success_predicate(const BenchmarkSpec& spec, std::size_t hold) {
  switch (spec.id) {
    case BenchmarkId::MountainCar:
      return [spec](std::span<const State> traj) {
        return std::any_of(traj.begin(), traj.end(),
                           [&](const State& s) { return in_goal_region(spec, s); });
      };
    case BenchmarkId::CartPoleBalance:
      return [](std::span<const State> traj) {
        return std::none_of(traj.begin(), traj.end(), [](const State& s) { return cpb_failed(s); });
      };
    case BenchmarkId::CartPoleSwingUp:
      break;
  }
  return [spec, hold](std::span<const State> traj) {
    if (traj.size() < hold) return false;
    return std::all_of(traj.end() - static_cast<std::ptrdiff_t>(hold), traj.end(),
                       [&](const State& s) { return in_goal_region(spec, s); });
  };
}

namespace {

// Applies the predicate to every recorded trajectory s_0 .. s_T.
std::vector<char> judge(const std::vector<std::vector<State>>& traj,
                        const TrajectoryPredicate& predicate) {
  std::vector<char> ok(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) ok[i] = predicate(traj[i]) ? 1 : 0;
  return ok;
}

std::vector<std::vector<State>> start_trajectories(std::span<const State> starts, int horizon) {
  std::vector<std::vector<State>> traj(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    traj[i].reserve(static_cast<std::size_t>(horizon) + 1);
    traj[i].push_back(starts[i]);
  }
  return traj;
}

double fraction(const std::vector<char>& ok) {
  if (ok.empty()) return 0.0;
  return static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / static_cast<double>(ok.size());
}

}  // namespace

double success_rate(const Environment& env, const Policy& policy, std::span<const State> starts,
                    int horizon, const TrajectoryPredicate& predicate) {
  auto traj = start_trajectories(starts, horizon);
  rollout_returns(env, policy, starts, horizon, 1.0, [&](std::size_t, std::span<const State> s) {
    for (std::size_t i = 0; i < s.size(); ++i) traj[i].push_back(s[i]);
  });
  return fraction(judge(traj, predicate));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractViolation("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvaluationReport evaluate_policy(const Environment& env, const FuzzyPolicyParams& policy,
                                 std::span<const State> starts, int horizon, double q,
                                 const TrajectoryPredicate& predicate) {
  EvaluationReport rep;
  rep.target = env.name();
  auto traj = start_trajectories(starts, horizon);
  rep.returns = rollout_returns(env, policy, starts, horizon, discount_from_q(q, horizon),
                                [&](std::size_t, std::span<const State> s) {
                                  for (std::size_t i = 0; i < s.size(); ++i) traj[i].push_back(s[i]);
                                });
  rep.successes = judge(traj, predicate);
  rep.fitness = weighted_fitness(rep.returns, {});
  rep.success_rate = fraction(rep.successes);
  rep.min = quantile(rep.returns, 0.0);
  rep.q25 = quantile(rep.returns, 0.25);
  rep.median = quantile(rep.returns, 0.5);
  rep.q75 = quantile(rep.returns, 0.75);
  rep.max = quantile(rep.returns, 1.0);
  return rep;
}

std::string to_jsonl(const EvaluationReport& report) {
  using text::number;
  std::string out;
  const std::string target = text::quoted(report.target);
  for (std::size_t i = 0; i < report.returns.size(); ++i) {
    out += "{\"record\":\"state\",\"target\":" + target + ",\"index\":" + std::to_string(i) +
           ",\"return\":" + number(report.returns[i]) +
           ",\"success\":" + (report.successes[i] ? "true" : "false") + "}\n";
  }
  out += "{\"record\":\"summary\",\"target\":" + target +
         ",\"states\":" + std::to_string(report.returns.size()) + ",\"F\":" + number(report.fitness) +
         ",\"success_rate\":" + number(report.success_rate) + ",\"min\":" + number(report.min) +
         ",\"q25\":" + number(report.q25) + ",\"median\":" + number(report.median) +
         ",\"q75\":" + number(report.q75) + ",\"max\":" + number(report.max) + "}\n";
  return out;
}

std::string format_report(const EvaluationReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-5s F = %9.4f  success = %6.2f%%  min %.3f  q25 %.3f  median %.3f  q75 %.3f  "
                "max %.3f  (%zu states)\n",
                report.target.c_str(), report.fitness, 100.0 * report.success_rate, report.min,
                report.q25, report.median, report.q75, report.max, report.returns.size());
  return buf;
}

}  // namespace fpsrl
