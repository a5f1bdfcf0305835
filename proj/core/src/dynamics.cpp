#include "fpsrl/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>

namespace fpsrl {

std::string_view to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::MountainCar: return "mc";
    case BenchmarkId::CartPoleBalance: return "cpb";
    case BenchmarkId::CartPoleSwingUp: return "cpsu";
  }
  return "?";
}

BenchmarkId parse_benchmark(std::string_view name) {
  if (name == "mc") return BenchmarkId::MountainCar;
  if (name == "cpb") return BenchmarkId::CartPoleBalance;
  if (name == "cpsu") return BenchmarkId::CartPoleSwingUp;
  throw ConfigError("unknown benchmark '" + std::string(name) + "' (expected mc, cpb or cpsu)");
}

std::string_view to_string(Region region) {
  return region == Region::Test ? "test" : "start";
}

Region parse_region(std::string_view name) {
  if (name == "start" || name == "data") return Region::DataGeneration;
  if (name == "test") return Region::Test;
  throw ConfigError("unknown start-state region '" + std::string(name) + "'");
}

BenchmarkSpec BenchmarkSpec::mountain_car_spec() {
  BenchmarkSpec s;
  s.id = BenchmarkId::MountainCar;
  s.state_dim = 2;
  s.action_max = 1.0;
  s.dt = 0.025;
  s.rk4_substeps = 4;
  s.horizon = 200;
  s.data_region = {{-1.2, 0.6}, {0.0, 0.0}};
  s.test_region = s.data_region;
  s.operating_range = {{-1.2, 0.6}, {-2.8, 2.8}};
  s.labels = {"rho [track]", "rho_dot [track/s]"};
  return s;
}

BenchmarkSpec BenchmarkSpec::cart_pole_balance_spec() {
  BenchmarkSpec s;
  s.id = BenchmarkId::CartPoleBalance;
  s.state_dim = 4;
  s.action_max = 10.0;
  s.dt = 0.025;
  s.rk4_substeps = 1;
  s.horizon = 100;
  s.data_region = {{-0.7, 0.7}, {0.0, 0.0}, {-2.4, 2.4}, {0.0, 0.0}};
  s.test_region = {{-0.5, 0.5}, {0.0, 0.0}, {-0.5, 0.5}, {0.0, 0.0}};
  s.operating_range = {{-0.7, 0.7}, {-3.0, 3.0}, {-2.4, 2.4}, {-3.0, 3.0}};
  s.labels = {"theta [rad]", "theta_dot [rad/s]", "rho [m]", "rho_dot [m/s]"};
  return s;
}

BenchmarkSpec BenchmarkSpec::cart_pole_swing_up_spec() {
  BenchmarkSpec s = cart_pole_balance_spec();
  s.id = BenchmarkId::CartPoleSwingUp;
  s.action_max = 30.0;
  s.horizon = 500;
  s.data_region = {{-kPi, kPi}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  s.test_region = {{-kPi, kPi}, {0.0, 0.0}, {-0.5, 0.5}, {0.0, 0.0}};
  s.operating_range = {{-kPi, kPi}, {-12.0, 12.0}, {-2.4, 2.4}, {-6.0, 6.0}};
  s.wrapped_dim = 0;
  return s;
}

BenchmarkSpec BenchmarkSpec::for_id(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::MountainCar: return mountain_car_spec();
    case BenchmarkId::CartPoleBalance: return cart_pole_balance_spec();
    case BenchmarkId::CartPoleSwingUp: return cart_pole_swing_up_spec();
  }
  throw ConfigError("unknown benchmark id");
}

void BenchmarkSpec::validate() const {
  if (horizon <= 1) throw ConfigError("benchmark horizon must exceed 1");
  if (!(dt > 0.0)) throw ConfigError("benchmark dt must be positive");
  if (!(action_max > 0.0)) throw ConfigError("action bound must be positive");
  if (rk4_substeps < 1) throw ConfigError("rk4 substeps must be >= 1");
  if (data_region.size() != state_dim || test_region.size() != state_dim ||
      operating_range.size() != state_dim || labels.size() != state_dim)
    throw ConfigError("benchmark region dimensions do not match the state dimension");
}

double wrap_angle(double theta) {
  const double two_pi = 2.0 * kPi;
  double w = theta - two_pi * std::floor((theta + kPi) / two_pi);
  // Guard the half-open upper end against rounding.
  if (w >= kPi) w -= two_pi;
  if (w < -kPi) w = -kPi;
  return w;
}

State mountain_car_derivative(const MountainCarPhysics& p, const State& s, double action) {
  return State{s[1], p.engine * action - p.gravity * std::cos(3.0 * s[0])};
}

State cart_pole_derivative(const CartPolePhysics& p, const State& s, double force) {
  const double theta = s[0];
  const double theta_dot = s[1];
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_ml = p.pole_mass * p.pole_half_length;
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double temp = (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (p.gravity * sin_t - cos_t * temp) /
      (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double rho_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
  return State{theta_dot, theta_acc, s[3], rho_acc};
}

namespace {

std::atomic<bool> g_clamp_logged{false};

void check_dim(const BenchmarkSpec& spec, const State& s) {
  if (s.size() != spec.state_dim)
    throw ContractViolation("state dimension " + std::to_string(s.size()) +
                            " does not match benchmark dimension " +
                            std::to_string(spec.state_dim));
}

template <class Field>
State integrate(Field&& field, const State& s, double action, double dt, int substeps) {
  State x = s;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) x = rk4_step(field, x, action, h);
  return x;
}

}  // namespace

double clamp_action(const BenchmarkSpec& spec, double action) {
  const double clamped = std::clamp(action, -spec.action_max, spec.action_max);
  if (clamped != action && !g_clamp_logged.exchange(true)) {
    std::clog << "fpsrl: action " << action << " outside [" << -spec.action_max << ", "
              << spec.action_max << "] clamped (reported once per run)\n";
  }
  return clamped;
}

double mc_reward(const BenchmarkSpec& spec, const State& next) {
  return next[0] >= spec.mountain_car.goal_position ? 0.0 : -1.0;
}

bool cpb_failed(const State& s) { return std::abs(s[0]) > 0.7 || std::abs(s[2]) > 2.4; }

double cpb_reward(const State& next) {
  if (std::abs(next[0]) < 0.25 && std::abs(next[2]) < 0.5) return 0.0;
  if (cpb_failed(next)) return -1.0;
  return -0.1;
}

double cpsu_reward(const State& next) {
  return (std::abs(next[0]) < 0.5 && std::abs(next[2]) < 0.5) ? 0.0 : -1.0;
}

bool in_goal_region(const BenchmarkSpec& spec, const State& s) {
  switch (spec.id) {
    case BenchmarkId::MountainCar: return s[0] >= spec.mountain_car.goal_position;
    case BenchmarkId::CartPoleBalance: return std::abs(s[0]) < 0.25 && std::abs(s[2]) < 0.5;
    case BenchmarkId::CartPoleSwingUp: return std::abs(s[0]) < 0.5 && std::abs(s[2]) < 0.5;
  }
  return false;
}

StepResult mc_step(const BenchmarkSpec& spec, const State& s, double action) {
  check_dim(spec, s);
  const auto& p = spec.mountain_car;
  if (s[0] >= p.goal_position) return {State{s[0], 0.0}, 0.0, true};

  const double a = clamp_action(spec, action);
  auto field = [&p](const State& x, double u) { return mountain_car_derivative(p, x, u); };
  State next = integrate(field, s, a, spec.dt, spec.rk4_substeps);
  if (next[0] <= p.position_min) {
    next[0] = p.position_min;
    next[1] = std::max(next[1], 0.0);
  }
  bool reached = false;
  if (next[0] >= p.goal_position) {
    next[0] = p.goal_position;
    reached = true;
  }
  return {next, reached ? 0.0 : -1.0, reached};
}

StepResult cp_step(const BenchmarkSpec& spec, const State& s, double action) {
  check_dim(spec, s);
  if (spec.id == BenchmarkId::CartPoleBalance && cpb_failed(s))
    return {State{s[0], 0.0, s[2], 0.0}, -1.0, true};

  const double a = clamp_action(spec, action);
  const auto& p = spec.cart_pole;
  auto field = [&p](const State& x, double u) { return cart_pole_derivative(p, x, u); };
  State next = integrate(field, s, a, spec.dt, spec.rk4_substeps);

  if (spec.id == BenchmarkId::CartPoleSwingUp) {
    next[0] = wrap_angle(next[0]);
    return {next, cpsu_reward(next), false};
  }
  if (cpb_failed(next)) {
    next[1] = 0.0;
    next[3] = 0.0;
    return {next, -1.0, true};
  }
  return {next, cpb_reward(next), false};
}

StepResult true_step(const BenchmarkSpec& spec, const State& s, double action) {
  if (spec.id == BenchmarkId::MountainCar) return mc_step(spec, s, action);
  return cp_step(spec, s, action);
}

std::vector<double> reward_codomain(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::MountainCar: return {0.0, -1.0};
    case BenchmarkId::CartPoleBalance: return {0.0, -0.1, -1.0};
    case BenchmarkId::CartPoleSwingUp: return {0.0, -1.0};
  }
  return {};
}

std::vector<State> sample_start_states(const BenchmarkSpec& spec, Region region, std::size_t n,
                                       Rng& rng) {
  if (n < 1) throw ContractViolation("sample_start_states: n must be >= 1");
  const auto& box = region == Region::Test ? spec.test_region : spec.data_region;
  if (box.size() != spec.state_dim) throw ConfigError("start-state region has wrong dimension");
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    State s(spec.state_dim);
    for (std::size_t j = 0; j < spec.state_dim; ++j)
      s[j] = box[j].lo == box[j].hi ? box[j].lo : rng.uniform(box[j].lo, box[j].hi);
    out.push_back(s);
  }
  return out;
}

}  // namespace fpsrl
