#include <cmath>
#include <set>

#include "doctest.h"
#include "fpsrl/dynamics.hpp"

using namespace fpsrl;

namespace {

State oscillator(const State& s, double) { return State{s[1], -s[0]}; }

// Reference solution of the swing-up plant: the same integrator at dt/100.
State fine_solution(const CartPolePhysics& p, const State& s, double force, double dt) {
  auto field = [&p](const State& x, double u) { return cart_pole_derivative(p, x, u); };
  State x = s;
  for (int i = 0; i < 100; ++i) x = rk4_step(field, x, force, dt / 100.0);
  return x;
}

double max_abs_diff(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("rk4 on constant and zero fields") {
  const State s{1.0, -2.0, 0.5};
  auto constant = [](const State&, double) { return State{0.5, -1.0, 2.0}; };
  const State out = rk4_step(constant, s, 0.0, 0.1);
  CHECK(out[0] == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-2.1).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(0.7).epsilon(1e-15));

  auto zero = [](const State&, double) { return State{0.0, 0.0, 0.0}; };
  CHECK(rk4_step(zero, s, 3.0, 0.1) == s);
}

TEST_CASE("rk4 harmonic oscillator matches the closed form") {
  const State out = rk4_step(oscillator, State{1.0, 0.0}, 0.0, 0.1);
  CHECK(std::abs(out[0] - std::cos(0.1)) <= 1e-6);
  CHECK(std::abs(out[1] + std::sin(0.1)) <= 1e-6);
}

TEST_CASE("rk4 rejects bad steps and non-finite fields") {
  CHECK_THROWS_AS(rk4_step(oscillator, State{1.0, 0.0}, 0.0, 0.0), ContractViolation);
  auto bad = [](const State&, double) { return State{std::nan(""), 0.0}; };
  CHECK_THROWS_AS(rk4_step(bad, State{1.0, 0.0}, 0.0, 0.1), IntegrationError);
}

TEST_CASE("rk4 is fourth order on the swing-up plant") {
  const CartPolePhysics p;
  auto field = [&p](const State& x, double u) { return cart_pole_derivative(p, x, u); };
  const State s{2.5, 1.0, 0.3, -0.4};
  for (double dt : {0.1, 0.05}) {
    const double e1 = max_abs_diff(rk4_step(field, s, 7.0, dt), fine_solution(p, s, 7.0, dt));
    const double e2 =
        max_abs_diff(rk4_step(field, s, 7.0, dt / 2), fine_solution(p, s, 7.0, dt / 2));
    CHECK(e1 / e2 >= 8.0);
  }
}

TEST_CASE("mountain car examples") {
  const BenchmarkSpec spec = BenchmarkSpec::mountain_car_spec();
  SUBCASE("goal is absorbing") {
    const StepResult r = mc_step(spec, State{0.6, 0.3}, -0.7);
    CHECK(r.next == State{0.6, 0.0});
    CHECK(r.reward == 0.0);
    CHECK(r.absorbing);
  }
  SUBCASE("one step from the valley") {
    const StepResult r = mc_step(spec, State{-0.5, 0.0}, 1.0);
    CHECK(r.reward == -1.0);
    // 40-digit evaluation of four RK4 substeps of x'' = 1.6 a - 4 cos(3 x).
    CHECK(std::abs(r.next[0] - -0.49958867802696408117) <= 1e-12);
    CHECK(std::abs(r.next[1] - 0.03288524146159767091) <= 1e-12);
  }
  SUBCASE("left wall is an inelastic stop") {
    const StepResult r = mc_step(spec, State{-1.19, -2.0}, -1.0);
    CHECK(r.next[0] == -1.2);
    CHECK(r.next[1] == 0.0);
  }
}

TEST_CASE("cart-pole examples") {
  const BenchmarkSpec cpb = BenchmarkSpec::cart_pole_balance_spec();
  const BenchmarkSpec cpsu = BenchmarkSpec::cart_pole_swing_up_spec();

  CHECK(cpb_reward(State{0.0, 0.0, 0.0, 0.0}) == 0.0);
  CHECK(cpb_reward(State{0.3, 0.0, 0.0, 0.0}) == -0.1);
  CHECK(cpb_reward(State{0.8, 0.0, 0.0, 0.0}) == -1.0);

  const StepResult failed = cp_step(cpb, State{0.1, 0.4, 2.5, 1.0}, 5.0);
  CHECK(failed.next == State{0.1, 0.0, 2.5, 0.0});
  CHECK(failed.reward == -1.0);
  CHECK(failed.absorbing);

  CHECK(cp_step(cpsu, State{kPi, 0.0, 0.0, 0.0}, 0.0).reward == -1.0);

  const StepResult crossing = cp_step(cpsu, State{kPi - 0.05, 4.0, 0.0, 0.0}, 0.0);
  CHECK(crossing.next[0] >= -kPi);
  CHECK(crossing.next[0] <= -kPi + 0.1);
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(kPi) == -kPi);
  CHECK(wrap_angle(-kPi) == -kPi);
  CHECK(wrap_angle(0.25) == 0.25);
  CHECK(wrap_angle(3 * kPi + 0.5) == doctest::Approx(-kPi + 0.5));
}

TEST_CASE("absorbing states are idempotent") {
  Rng rng(3);
  const BenchmarkSpec mc = BenchmarkSpec::mountain_car_spec();
  const BenchmarkSpec cpb = BenchmarkSpec::cart_pole_balance_spec();
  State goal{0.6, 0.0};
  State fail = cp_step(cpb, State{0.69, 3.0, 0.0, 0.0}, 10.0).next;
  REQUIRE(cpb_failed(fail));
  for (int i = 0; i < 100; ++i) {
    const StepResult g = mc_step(mc, goal, rng.uniform(-1, 1));
    CHECK(g.next == goal);
    CHECK(g.reward == 0.0);
    const StepResult f = cp_step(cpb, fail, rng.uniform(-10, 10));
    CHECK(f.next == fail);
    CHECK(f.reward == -1.0);
  }
}

TEST_CASE("rewards stay in the codomain over many random steps") {
  Rng rng(11);
  for (BenchmarkId id :
       {BenchmarkId::MountainCar, BenchmarkId::CartPoleBalance, BenchmarkId::CartPoleSwingUp}) {
    const BenchmarkSpec spec = BenchmarkSpec::for_id(id);
    const auto codomain = reward_codomain(id);
    const std::set<double> allowed(codomain.begin(), codomain.end());
    std::size_t bad = 0;
    State s = sample_start_states(spec, Region::DataGeneration, 1, rng)[0];
    for (int i = 0; i < 100000; ++i) {
      if (i % 200 == 0) s = sample_start_states(spec, Region::DataGeneration, 1, rng)[0];
      const StepResult r = true_step(spec, s, rng.uniform(-spec.action_max, spec.action_max));
      bad += allowed.count(r.reward) == 0;
      s = r.next;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("cart-pole dynamics are mirror symmetric") {
  Rng rng(5);
  for (BenchmarkId id : {BenchmarkId::CartPoleBalance, BenchmarkId::CartPoleSwingUp}) {
    const BenchmarkSpec spec = BenchmarkSpec::for_id(id);
    for (int i = 0; i < 1000; ++i) {
      const State s{rng.uniform(-0.6, 0.6), rng.uniform(-2, 2), rng.uniform(-2, 2),
                    rng.uniform(-2, 2)};
      const double a = rng.uniform(-spec.action_max, spec.action_max);
      const State m{-s[0], -s[1], -s[2], -s[3]};
      const StepResult p = cp_step(spec, s, a);
      const StepResult q = cp_step(spec, m, -a);
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(p.next[j] + q.next[j]) <= 1e-9);
      CHECK(p.reward == q.reward);
    }
  }
}

TEST_CASE("steps are deterministic") {
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_swing_up_spec();
  const State s{1.0, -0.5, 0.2, 0.1};
  const StepResult a = cp_step(spec, s, 12.5);
  const StepResult b = cp_step(spec, s, 12.5);
  CHECK(a.next == b.next);
  CHECK(a.reward == b.reward);
}

TEST_CASE("start-state regions") {
  Rng rng(1);
  const auto mc = sample_start_states(BenchmarkSpec::mountain_car_spec(), Region::DataGeneration,
                                      500, rng);
  for (const State& s : mc) {
    CHECK(s[1] == 0.0);
    CHECK(s[0] >= -1.2);
    CHECK(s[0] <= 0.6);
  }
  const auto su =
      sample_start_states(BenchmarkSpec::cart_pole_swing_up_spec(), Region::Test, 500, rng);
  for (const State& s : su) {
    CHECK(std::abs(s[0]) <= kPi);
    CHECK(std::abs(s[2]) <= 0.5);
    CHECK(s[1] == 0.0);
    CHECK(s[3] == 0.0);
  }
  Rng r1(99), r2(99);
  const BenchmarkSpec cpb = BenchmarkSpec::cart_pole_balance_spec();
  CHECK(sample_start_states(cpb, Region::Test, 1000, r1) ==
        sample_start_states(cpb, Region::Test, 1000, r2));
  CHECK_THROWS_AS(parse_region("elsewhere"), ConfigError);
  CHECK_THROWS_AS(sample_start_states(cpb, Region::Test, 0, r1), ContractViolation);
}

TEST_CASE("actions are clamped to the benchmark bounds") {
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_balance_spec();
  CHECK(clamp_action(spec, 25.0) == 10.0);
  CHECK(clamp_action(spec, -25.0) == -10.0);
  CHECK(cp_step(spec, State{0.1, 0, 0, 0}, 25.0).next == cp_step(spec, State{0.1, 0, 0, 0}, 10.0).next);
}

TEST_CASE("benchmark ids parse") {
  CHECK(parse_benchmark("cpsu") == BenchmarkId::CartPoleSwingUp);
  CHECK(to_string(BenchmarkId::MountainCar) == "mc");
  CHECK_THROWS_AS(parse_benchmark("acrobot"), ConfigError);
  CHECK_THROWS_AS(mc_step(BenchmarkSpec::mountain_car_spec(), State{0.0, 0.0, 0.0}, 0.0),
                  ContractViolation);
}
