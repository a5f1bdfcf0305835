#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fpsrl/dynamics.hpp"

namespace fpsrl {

/// Lower bound applied to every Gaussian width when decoding a parameter vector.
inline constexpr double kSigmaMin = 1e-3;

/// IF s is m(c, sigma) THEN output.
struct FuzzyRule {
  std::vector<double> centers;
  std::vector<double> widths;
  double output = 0.0;

  std::size_t dim() const noexcept { return centers.size(); }
  friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

/// A Gaussian fuzzy-rule policy. Actions are `scale * tanh(slope * weighted mean of outputs)`.
struct FuzzyPolicyParams {
  std::vector<FuzzyRule> rules;
  double slope = 1.0;
  double scale = 1.0;

  std::size_t rule_count() const noexcept { return rules.size(); }
  std::size_t state_dim() const noexcept { return rules.empty() ? 0 : rules.front().dim(); }
  friend bool operator==(const FuzzyPolicyParams&, const FuzzyPolicyParams&) = default;
};

/// Mirrored-rule construction for problems symmetric around the origin.
struct SymmetrySpec {
  bool enabled = false;
  std::size_t rule_count = 2;  // total rules C after expansion

  std::size_t free_rules() const { return enabled ? rule_count / 2 : rule_count; }
  void validate() const;
};

/// Product of per-dimension Gaussians; in (0, 1], exactly 1 at the centers.
double membership(const FuzzyRule& rule, std::span<const double> s);
inline double membership(const FuzzyRule& rule, const State& s) {
  return membership(rule, s.values());
}

double policy_output(const FuzzyPolicyParams& params, std::span<const double> s);
inline double policy_output(const FuzzyPolicyParams& params, const State& s) {
  return policy_output(params, s.values());
}

/// Flat parameter length (2D + 1) * C + 1.
std::size_t encoded_size(std::size_t state_dim, std::size_t rule_count);

/// Per rule: c_1..c_D, sigma_1..sigma_D, o; then the slope last.
std::vector<double> encode(const FuzzyPolicyParams& params);

/// Inverse of encode. Widths become max(|sigma|, kSigmaMin).
FuzzyPolicyParams decode(std::span<const double> x, std::size_t state_dim,
                         std::size_t rule_count, double scale);

/// Decodes C/2 free rules and appends (-c, sigma, -o) for each of them.
FuzzyPolicyParams expand_symmetric(std::span<const double> half, std::size_t state_dim,
                                   std::size_t rule_count, double scale);

/// Decodes a search-space point according to the symmetry setting.
FuzzyPolicyParams decode_policy(std::span<const double> x, std::size_t state_dim,
                                const SymmetrySpec& symmetry, double scale);

/// PSO search box for a policy of the given benchmark.
struct SearchBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Centers span 1.5x the operating range, widths [kSigmaMin, extent],
/// outputs [-5, 5], slope [0, 10].
SearchBox policy_search_box(const BenchmarkSpec& spec, const SymmetrySpec& symmetry);

/// Persisted policy: benchmark, symmetry flag and the expanded rule set.
struct PolicyFile {
  BenchmarkId benchmark = BenchmarkId::MountainCar;
  bool symmetric = false;
  FuzzyPolicyParams params;
};

inline constexpr int kPolicyFormatVersion = 1;

void save_policy(const PolicyFile& policy, const std::string& path);
PolicyFile load_policy(const std::string& path);

struct Rendering {
  std::string text;
  std::string svg;
};

/// Membership profiles per rule and dimension plus an activation table for
/// each sample state. `ranges` sets the plotted interval of each dimension.
Rendering render_rules(const FuzzyPolicyParams& params, const std::vector<std::string>& labels,
                       const std::vector<Interval>& ranges, const std::vector<State>& samples);

}  // namespace fpsrl
