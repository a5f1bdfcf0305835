#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpsrl/error.hpp"
#include "fpsrl/random.hpp"

namespace fpsrl {

inline constexpr std::size_t kMaxStateDim = 4;
inline constexpr double kPi = 3.14159265358979323846;

/// Fixed-capacity state vector. Mountain car uses [position, velocity];
/// the cart-pole variants use [theta, theta_dot, rho, rho_dot].
class State {
 public:
  State() = default;

  explicit State(std::size_t dim) : dim_(dim) {
    if (dim > kMaxStateDim) throw ContractViolation("state dimension exceeds capacity");
  }

  State(std::initializer_list<double> values) : State(values.size()) {
    std::size_t i = 0;
    for (double v : values) values_[i++] = v;
  }

  explicit State(std::span<const double> values) : State(values.size()) {
    for (std::size_t i = 0; i < dim_; ++i) values_[i] = values[i];
  }

  std::size_t size() const noexcept { return dim_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return {values_.data(), dim_}; }
  std::span<const double> values() const noexcept { return {values_.data(), dim_}; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.begin() + static_cast<std::ptrdiff_t>(dim_); }

  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < dim_; ++i)
      if (!std::isfinite(values_[i])) return false;
    return true;
  }

  friend bool operator==(const State& a, const State& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
      if (a.values_[i] != b.values_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxStateDim> values_{};
  std::size_t dim_ = 0;
};

enum class BenchmarkId { MountainCar, CartPoleBalance, CartPoleSwingUp };

std::string_view to_string(BenchmarkId id);
/// Accepts the short ids "mc", "cpb", "cpsu".
BenchmarkId parse_benchmark(std::string_view name);

enum class Region { DataGeneration, Test };

std::string_view to_string(Region region);
/// Accepts "start" / "data" for the data-generation region and "test".
Region parse_region(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double extent() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
};

/// Hill-climbing car: x'' = engine * a - gravity * cos(3 x).
struct MountainCarPhysics {
  double engine = 1.6;
  double gravity = 4.0;
  double position_min = -1.2;
  double goal_position = 0.6;
};

/// Frictionless cart-pole (Barto, Sutton and Anderson).
struct CartPolePhysics {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
};

/// Everything that distinguishes one benchmark from another.
struct BenchmarkSpec {
  BenchmarkId id = BenchmarkId::MountainCar;
  std::size_t state_dim = 2;
  double action_max = 1.0;  // actions live in [-action_max, action_max]
  double dt = 0.025;        // control interval in seconds
  int rk4_substeps = 1;
  int horizon = 200;
  double q = 0.05;

  MountainCarPhysics mountain_car{};
  CartPolePhysics cart_pole{};

  /// Start-state boxes. Degenerate intervals pin a coordinate.
  std::vector<Interval> data_region;
  std::vector<Interval> test_region;
  /// Typical operating range of each state variable, used to size the
  /// policy search box and the rendering axes.
  std::vector<Interval> operating_range;
  /// Index of a state variable that wraps on [-pi, pi), or -1.
  int wrapped_dim = -1;

  std::vector<std::string> labels;

  static BenchmarkSpec mountain_car_spec();
  static BenchmarkSpec cart_pole_balance_spec();
  static BenchmarkSpec cart_pole_swing_up_spec();
  static BenchmarkSpec for_id(BenchmarkId id);

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

struct StepResult {
  State next;
  double reward = 0.0;
  /// Set when `next` is an absorbing state (MC goal, CPB failure).
  bool absorbing = false;
};

/// Classical fourth-order Runge-Kutta step with the action held constant.
/// `field(state, action)` returns the time derivative as a State.
template <class Field>
State rk4_step(Field&& field, const State& s, double action, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("rk4_step: dt must be positive");
  const std::size_t n = s.size();
  auto axpy = [n](const State& x, double h, const State& k) {
    State out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h * k[i];
    return out;
  };
  const State k1 = field(s, action);
  const State k2 = field(axpy(s, 0.5 * dt, k1), action);
  const State k3 = field(axpy(s, 0.5 * dt, k2), action);
  const State k4 = field(axpy(s, dt, k3), action);
  State out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(k1[i]) || !std::isfinite(k2[i]) || !std::isfinite(k3[i]) ||
        !std::isfinite(k4[i]) || !std::isfinite(out[i]))
      throw IntegrationError("rk4_step: non-finite derivative or state");
  }
  return out;
}

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

State mountain_car_derivative(const MountainCarPhysics& p, const State& s, double action);
State cart_pole_derivative(const CartPolePhysics& p, const State& s, double force);

/// One control interval of the mountain car. Out-of-range actions are clamped.
StepResult mc_step(const BenchmarkSpec& spec, const State& s, double action);

/// One control interval of cart-pole balancing or swing-up (by spec.id).
StepResult cp_step(const BenchmarkSpec& spec, const State& s, double action);

/// Dispatches to the step function of spec.id.
StepResult true_step(const BenchmarkSpec& spec, const State& s, double action);

/// Reward of entering `next` (cart-pole rewards depend on the successor only).
double mc_reward(const BenchmarkSpec& spec, const State& next);
double cpb_reward(const State& next);
double cpsu_reward(const State& next);

bool cpb_failed(const State& s);
bool in_goal_region(const BenchmarkSpec& spec, const State& s);

/// The finite set of rewards the benchmark can emit.
std::vector<double> reward_codomain(BenchmarkId id);

/// n i.i.d. uniform draws from the requested start-state box.
std::vector<State> sample_start_states(const BenchmarkSpec& spec, Region region, std::size_t n,
                                       Rng& rng);

double clamp_action(const BenchmarkSpec& spec, double action);

}  // namespace fpsrl
