#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fpsrl/rl_eval.hpp"

using namespace fpsrl;

namespace {

/// States stay put; every step pays `reward`. Fails at step `fail_at` if set.
class ConstantEnv final : public Environment {
 public:
  ConstantEnv(double reward, int fail_at = -1)
      : reward_(reward), fail_at_(fail_at), spec_(BenchmarkSpec::mountain_car_spec()) {}
  const BenchmarkSpec& spec() const override { return spec_; }
  void step_batch(std::span<const State> s, std::span<const double>, std::span<State> next,
                  std::span<double> r) const override {
    if (fail_at_ >= 0 && calls_++ == fail_at_) throw ModelError("synthetic failure");
    for (std::size_t k = 0; k < s.size(); ++k) {
      next[k] = s[k];
      r[k] = reward_;
    }
  }
  std::string name() const override { return "const"; }

 private:
  double reward_;
  int fail_at_;
  mutable int calls_ = 0;
  BenchmarkSpec spec_;
};

// r (1 - gamma^t) / (1 - gamma), without cancellation for gamma near 1.
double geometric(double r, double gamma, int t) {
  return -r * std::expm1(t * std::log(gamma)) / (1 - gamma);
}

}  // namespace

TEST_CASE("discount values") {
  // 30-digit evaluations of 0.05^(1/(T-1)).
  CHECK(discount_from_q(0.05, 200) == doctest::Approx(0.985058812941104743).epsilon(1e-15));
  CHECK(discount_from_q(0.05, 100) == doctest::Approx(0.970193326226649105).epsilon(1e-15));
  CHECK(discount_from_q(0.05, 500) == doctest::Approx(0.994014513336415170).epsilon(1e-15));
  CHECK(discount_from_q(1.0, 50) == 1.0);
  CHECK_THROWS_AS(discount_from_q(0.05, 1), ContractViolation);
  CHECK_THROWS_AS(discount_from_q(1.5, 10), ContractViolation);
  double prev = 0.0;
  for (int t : {2, 10, 100, 200, 500, 1000}) {
    CHECK(discount_from_q(0.05, t) > prev);
    prev = discount_from_q(0.05, t);
  }
  CHECK(discount_from_q(0.1, 100) > discount_from_q(0.05, 100));
}

TEST_CASE("constant-reward returns are geometric series") {
  const Policy zero = [](const State&) { return 0.0; };
  const State s{0.0, 0.0};
  CHECK(rollout_return(ConstantEnv(0.0), zero, s, 200, 0.9851) == 0.0);
  for (double gamma : {0.5, 0.9, 0.9851, 0.994, 1.0 - 1e-9}) {
    for (int t : {1, 7, 200, 500}) {
      const double got = rollout_return(ConstantEnv(-1.0), zero, s, t, gamma);
      CHECK(std::abs(got - geometric(-1.0, gamma, t)) <= 1e-10 * std::max(1.0, std::abs(got)));
    }
  }
  const double worst = rollout_return(ConstantEnv(-1.0), zero, s, 200, discount_from_q(0.05, 200));
  CHECK(worst == doctest::Approx(-63.6326321064909085).epsilon(1e-12));
}

TEST_CASE("mountain car from the goal returns zero") {
  const TrueEnvironment env(BenchmarkSpec::mountain_car_spec());
  const Policy push = [](const State&) { return -1.0; };
  CHECK(rollout_return(env, push, State{0.6, 0.0}, 200, 0.9851) == 0.0);
}

TEST_CASE("rollout failures carry the step index") {
  const Policy zero = [](const State&) { return 0.0; };
  try {
    rollout_return(ConstantEnv(-1.0, 4), zero, State{0.0, 0.0}, 10, 0.9);
    FAIL("expected a RolloutError");
  } catch (const RolloutError& e) {
    CHECK(e.step() == 4);
  }
}

TEST_CASE("fitness averages returns and fails soft") {
  const double w[] = {0.5, 0.5};
  const double r[] = {-10.0, -20.0};
  CHECK(weighted_fitness(r, w) == -15.0);
  CHECK(weighted_fitness(r, {}) == -15.0);

  const TrueEnvironment env(BenchmarkSpec::mountain_car_spec());
  Rng rng(51);
  EvaluationSpec spec;
  spec.horizon = 200;
  spec.starts = sample_start_states(env.spec(), Region::Test, 20, rng);
  spec.env = &env;
  const PolicyEncoding enc{2, SymmetrySpec{false, 2}, 1.0};
  const SearchBox box = policy_search_box(env.spec(), enc.symmetry);
  std::vector<double> x(box.lower.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(box.lower[k], box.upper[k]);

  const double f = fitness(x, enc, spec);
  const FuzzyPolicyParams p = decode_policy(x, 2, enc.symmetry, 1.0);
  const auto returns = rollout_returns(env, p, spec.starts, 200, spec.gamma());
  double mean = 0.0;
  for (double v : returns) mean += v / static_cast<double>(returns.size());
  CHECK(f == doctest::Approx(mean).epsilon(1e-12));

  // Single start state equals its rollout return.
  EvaluationSpec one = spec;
  one.starts = {spec.starts[3]};
  CHECK(fitness(x, enc, one) == returns[3]);

  // Permuting the start states leaves the fitness unchanged.
  EvaluationSpec perm = spec;
  std::reverse(perm.starts.begin(), perm.starts.end());
  CHECK(fitness(x, enc, perm) == doctest::Approx(f).epsilon(1e-12));

  // Wrong length and failing environments give -infinity.
  x.pop_back();
  CHECK(fitness(x, enc, spec) == -std::numeric_limits<double>::infinity());
  const ConstantEnv failing(-1.0, 0);
  EvaluationSpec broken = spec;
  broken.env = &failing;
  x.push_back(1.0);
  CHECK(fitness(x, enc, broken) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("returns stay inside the reward bounds") {
  Rng rng(52);
  for (BenchmarkId id :
       {BenchmarkId::MountainCar, BenchmarkId::CartPoleBalance, BenchmarkId::CartPoleSwingUp}) {
    const TrueEnvironment env(BenchmarkSpec::for_id(id));
    const auto& spec = env.spec();
    const double gamma = discount_from_q(spec.q, spec.horizon);
    const auto cod = reward_codomain(id);
    const double lo = *std::min_element(cod.begin(), cod.end()) *
                      (1 - std::pow(gamma, spec.horizon)) / (1 - gamma);
    const double a = rng.uniform(-spec.action_max, spec.action_max);
    const Policy constant = [a](const State&) { return a; };
    const auto starts = sample_start_states(spec, Region::Test, 30, rng);
    for (double r : rollout_returns(env, constant, starts, spec.horizon, gamma)) {
      CHECK(r <= 1e-12);
      CHECK(r >= lo - 1e-9);
    }
  }
}

TEST_CASE("success rates") {
  const TrueEnvironment env(BenchmarkSpec::cart_pole_swing_up_spec());
  Rng rng(53);
  const auto starts = sample_start_states(env.spec(), Region::Test, 40, rng);
  const Policy zero = [](const State&) { return 0.0; };
  const double rate = success_rate(env, zero, starts, 500, default_success_predicate(env.spec()));
  CHECK(rate <= 0.1);
  CHECK(success_rate(env, zero, starts, 10, [](std::span<const State>) { return true; }) == 1.0);

  const TrueEnvironment mc(BenchmarkSpec::mountain_car_spec());
  const auto pred = default_success_predicate(mc.spec());
  const std::vector<State> at_goal{State{-0.5, 0.0}, State{0.6, 0.0}};
  CHECK(pred(at_goal));
  const std::vector<State> nowhere{State{-0.5, 0.0}, State{-0.4, 0.0}};
  CHECK_FALSE(pred(nowhere));
}

TEST_CASE("quantiles") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.0) == 1.0);
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 1.0) == 4.0);
  CHECK(quantile({5.0}, 0.25) == 5.0);
}

TEST_CASE("evaluation reports") {
  const TrueEnvironment env(BenchmarkSpec::mountain_car_spec());
  Rng rng(54);
  const auto starts = sample_start_states(env.spec(), Region::Test, 10, rng);
  FuzzyPolicyParams p{{FuzzyRule{{-0.5, 0.0}, {0.5, 1.0}, 1.0}}, 1.0, 1.0};
  const EvaluationReport r =
      evaluate_policy(env, p, starts, 200, 0.05, default_success_predicate(env.spec()));
  CHECK(r.returns.size() == 10);
  CHECK(r.min <= r.q25);
  CHECK(r.q25 <= r.median);
  CHECK(r.median <= r.q75);
  CHECK(r.q75 <= r.max);
  const std::string lines = to_jsonl(r);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 11);
  CHECK(lines.find("\"F\"") != std::string::npos);
  CHECK(format_report(r).find("success") != std::string::npos);
}
