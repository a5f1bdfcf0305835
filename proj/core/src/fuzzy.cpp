#include "fpsrl/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <sstream>

#include "fpsrl/text_format.hpp"

namespace fpsrl {

namespace {

// log of the rule's membership grade
double log_membership(const FuzzyRule& rule, std::span<const double> s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double z = (rule.centers[j] - s[j]) / rule.widths[j];
    acc -= 0.5 * z * z;
  }
  return acc;
}

void check_rule_dim(const FuzzyRule& rule, std::size_t dim) {
  if (rule.centers.size() != dim || rule.widths.size() != dim)
    throw ContractViolation("fuzzy rule dimension " + std::to_string(rule.centers.size()) +
                            " does not match state dimension " + std::to_string(dim));
}

}  // namespace

void SymmetrySpec::validate() const {
  if (rule_count < 1) throw ConfigError("rule count must be >= 1");
  if (enabled && rule_count % 2 != 0)
    throw ConfigError("symmetric policies need an even rule count, got " +
                      std::to_string(rule_count));
}

double membership(const FuzzyRule& rule, std::span<const double> s) {
  check_rule_dim(rule, s.size());
  double grade = 1.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double d = rule.centers[j] - s[j];
    grade *= std::exp(-(d * d) / (2.0 * rule.widths[j] * rule.widths[j]));
  }
  return grade;
}

double policy_output(const FuzzyPolicyParams& params, std::span<const double> s) {
  const std::size_t c = params.rules.size();
  if (c == 0) throw ContractViolation("policy has no rules");
  // Memberships are normalized by the largest one, which leaves the weighted
  // mean unchanged and keeps the denominator >= 1 far from every center.
  double logs[16];
  std::vector<double> heap;
  double* lm = logs;
  if (c > 16) {
    heap.resize(c);
    lm = heap.data();
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c; ++i) {
    check_rule_dim(params.rules[i], s.size());
    lm[i] = log_membership(params.rules[i], s);
    top = std::max(top, lm[i]);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double m = std::exp(lm[i] - top);
    num += m * params.rules[i].output;
    den += m;
  }
  return params.scale * std::tanh(params.slope * num / den);
}

std::size_t encoded_size(std::size_t state_dim, std::size_t rule_count) {
  return (2 * state_dim + 1) * rule_count + 1;
}

std::vector<double> encode(const FuzzyPolicyParams& params) {
  const std::size_t d = params.state_dim();
  std::vector<double> x;
  x.reserve(encoded_size(d, params.rules.size()));
  for (const auto& rule : params.rules) {
    check_rule_dim(rule, d);
    x.insert(x.end(), rule.centers.begin(), rule.centers.end());
    x.insert(x.end(), rule.widths.begin(), rule.widths.end());
    x.push_back(rule.output);
  }
  x.push_back(params.slope);
  return x;
}

FuzzyPolicyParams decode(std::span<const double> x, std::size_t state_dim,
                         std::size_t rule_count, double scale) {
  if (x.size() != encoded_size(state_dim, rule_count))
    throw ContractViolation("decode: expected " +
                            std::to_string(encoded_size(state_dim, rule_count)) +
                            " parameters, got " + std::to_string(x.size()));
  FuzzyPolicyParams p;
  p.scale = scale;
  p.rules.resize(rule_count);
  std::size_t k = 0;
  for (auto& rule : p.rules) {
    rule.centers.assign(x.begin() + static_cast<std::ptrdiff_t>(k),
                        x.begin() + static_cast<std::ptrdiff_t>(k + state_dim));
    k += state_dim;
    rule.widths.resize(state_dim);
    for (std::size_t j = 0; j < state_dim; ++j) rule.widths[j] = std::max(std::abs(x[k++]), kSigmaMin);
    rule.output = x[k++];
  }
  p.slope = x[k];
  return p;
}

FuzzyPolicyParams expand_symmetric(std::span<const double> half, std::size_t state_dim,
                                   std::size_t rule_count, double scale) {
  SymmetrySpec sym{true, rule_count};
  sym.validate();
  FuzzyPolicyParams p = decode(half, state_dim, rule_count / 2, scale);
  const std::size_t free = p.rules.size();
  for (std::size_t i = 0; i < free; ++i) {
    FuzzyRule mirror = p.rules[i];
    for (double& c : mirror.centers) c = -c;
    mirror.output = -mirror.output;
    p.rules.push_back(std::move(mirror));
  }
  return p;
}

FuzzyPolicyParams decode_policy(std::span<const double> x, std::size_t state_dim,
                                const SymmetrySpec& symmetry, double scale) {
  symmetry.validate();
  if (symmetry.enabled) return expand_symmetric(x, state_dim, symmetry.rule_count, scale);
  return decode(x, state_dim, symmetry.rule_count, scale);
}

SearchBox policy_search_box(const BenchmarkSpec& spec, const SymmetrySpec& symmetry) {
  symmetry.validate();
  SearchBox box;
  const std::size_t d = spec.state_dim;
  for (std::size_t i = 0; i < symmetry.free_rules(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& r = spec.operating_range[j];
      box.lower.push_back(r.mid() - 0.75 * r.extent());
      box.upper.push_back(r.mid() + 0.75 * r.extent());
    }
    for (std::size_t j = 0; j < d; ++j) {
      box.lower.push_back(kSigmaMin);
      box.upper.push_back(spec.operating_range[j].extent());
    }
    box.lower.push_back(-5.0);
    box.upper.push_back(5.0);
  }
  box.lower.push_back(0.0);
  box.upper.push_back(10.0);
  return box;
}

void save_policy(const PolicyFile& policy, const std::string& path) {
  const auto& p = policy.params;
  std::ostringstream out;
  out << "{\"format\":\"fpsrl-policy\",\"format_version\":" << kPolicyFormatVersion << "}\n";
  out << "{\"benchmark\":" << text::quoted(to_string(policy.benchmark))
      << ",\"D\":" << p.state_dim() << ",\"C\":" << p.rule_count()
      << ",\"scale\":" << text::number(p.scale)
      << ",\"symmetric\":" << (policy.symmetric ? "true" : "false") << "}\n";
  out << "{\"x\":" << text::number_array(encode(p)) << "}\n";
  text::write_file(path, out.str());
}

PolicyFile load_policy(const std::string& path) {
  const std::string contents = text::read_file(path);
  std::istringstream in(contents);
  std::string line;
  std::vector<nlohmann::json> records;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path, lineno, std::string("malformed record: ") + e.what());
    }
  }
  if (records.size() != 3) throw LoadError(path, lineno, "expected 3 policy records");
  try {
    const auto& head = records[0];
    if (head.at("format").get<std::string>() != "fpsrl-policy")
      throw LoadError(path, 1, "not a policy file");
    if (head.at("format_version").get<int>() != kPolicyFormatVersion)
      throw LoadError(path, 1, "unsupported policy format version");
    const auto& meta = records[1];
    PolicyFile pf;
    pf.benchmark = parse_benchmark(meta.at("benchmark").get<std::string>());
    pf.symmetric = meta.at("symmetric").get<bool>();
    const auto dim = meta.at("D").get<std::size_t>();
    const auto rules = meta.at("C").get<std::size_t>();
    const double scale = meta.at("scale").get<double>();
    const auto x = records[2].at("x").get<std::vector<double>>();
    if (x.size() != encoded_size(dim, rules))
      throw LoadError(path, 3, "parameter vector length does not match D and C");
    pf.params = decode(x, dim, rules, scale);
    return pf;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path, 0, std::string("invalid policy record: ") + e.what());
  }
}

}  // namespace fpsrl
