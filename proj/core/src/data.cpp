#include "fpsrl/data.hpp"

#include <algorithm>
#include <sstream>

#include "fpsrl/text_format.hpp"
#include "json.hpp"

namespace fpsrl {

std::string_view to_string(PolicyKind kind) {
  return kind == PolicyKind::RandomWalk ? "random-walk" : "uniform-random";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "uniform-random") return PolicyKind::UniformRandom;
  if (name == "random-walk") return PolicyKind::RandomWalk;
  throw ConfigError("unknown exploration policy '" + std::string(name) + "'");
}

PolicyKind default_policy_kind(BenchmarkId id) {
  return id == BenchmarkId::MountainCar ? PolicyKind::UniformRandom : PolicyKind::RandomWalk;
}

std::size_t default_episode_len(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::MountainCar: return 200;
    case BenchmarkId::CartPoleBalance: return 100;
    case BenchmarkId::CartPoleSwingUp: return 500;
  }
  return 100;
}

Batch generate_batch(const BenchmarkSpec& spec, std::size_t size, std::size_t episode_len,
                     PolicyKind kind, std::uint64_t seed) {
  if (size < 1) throw ContractViolation("generate_batch: size must be >= 1");
  if (episode_len < 1) throw ContractViolation("generate_batch: episode length must be >= 1");
  Batch batch;
  batch.benchmark = spec.id;
  batch.seed = seed;
  batch.policy_kind = kind;
  batch.episode_len = episode_len;
  batch.transitions.reserve(size);

  const double amax = spec.action_max;
  const double step_bound = kRandomWalkStepFraction * 2.0 * amax;
  for (std::int64_t traj = 0; batch.size() < size; ++traj) {
    // Each trajectory draws from its own stream.
    Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(traj)});
    State s = sample_start_states(spec, Region::DataGeneration, 1, rng).front();
    double a = 0.0;
    for (std::size_t t = 0; t < episode_len && batch.size() < size; ++t) {
      if (kind == PolicyKind::UniformRandom)
        a = rng.uniform(-amax, amax);
      else
        a = std::clamp(a + rng.uniform(-step_bound, step_bound), -amax, amax);
      const StepResult res = true_step(spec, s, a);
      batch.transitions.push_back({s, a, res.next, res.reward, traj, static_cast<std::int64_t>(t)});
      s = res.next;
    }
  }
  return batch;
}

std::size_t validate_batch(const BenchmarkSpec& spec, const Batch& batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch.transitions[i];
    const StepResult res = true_step(spec, t.s, t.a);
    if (!(res.next == t.s_next) || res.reward != t.r) return i;
  }
  return batch.size();
}

std::string batch_to_jsonl(const Batch& batch) {
  std::string out;
  out.reserve(batch.size() * 120 + 128);
  out += "{\"format_version\":" + std::to_string(kBatchFormatVersion) +
         ",\"benchmark\":" + text::quoted(to_string(batch.benchmark)) +
         ",\"seed\":" + std::to_string(batch.seed) +
         ",\"policy_kind\":" + text::quoted(to_string(batch.policy_kind)) +
         ",\"episode_len\":" + std::to_string(batch.episode_len) + "}\n";
  for (const auto& t : batch.transitions) {
    out += "{\"traj\":" + std::to_string(t.trajectory) + ",\"step\":" + std::to_string(t.step) +
           ",\"s\":" + text::number_array(t.s.values()) + ",\"a\":" + text::number(t.a) +
           ",\"s_next\":" + text::number_array(t.s_next.values()) +
           ",\"r\":" + text::number(t.r) + "}\n";
  }
  return out;
}

namespace {

State state_from_json(const nlohmann::json& j, std::size_t dim) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != dim) throw ContractViolation("state has dimension " + std::to_string(v.size()));
  return State(std::span<const double>(v));
}

}  // namespace

Batch batch_from_jsonl(std::string_view contents, const std::string& origin) {
  Batch batch;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool have_header = false;
  std::size_t dim = 0;
  while (pos < contents.size()) {
    const std::size_t nl = contents.find('\n', pos);
    const std::string_view line =
        contents.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? contents.size() : nl + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.at("format_version").get<int>() != kBatchFormatVersion)
          throw LoadError(origin, lineno, "unsupported batch format version");
        batch.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
        batch.seed = j.at("seed").get<std::uint64_t>();
        batch.policy_kind = parse_policy_kind(j.at("policy_kind").get<std::string>());
        batch.episode_len = j.at("episode_len").get<std::size_t>();
        dim = BenchmarkSpec::for_id(batch.benchmark).state_dim;
        have_header = true;
        continue;
      }
      Transition t;
      t.trajectory = j.at("traj").get<std::int64_t>();
      t.step = j.at("step").get<std::int64_t>();
      t.s = state_from_json(j.at("s"), dim);
      t.a = j.at("a").get<double>();
      t.s_next = state_from_json(j.at("s_next"), dim);
      t.r = j.at("r").get<double>();
      batch.transitions.push_back(t);
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError(origin, lineno, std::string("malformed record: ") + e.what());
    }
  }
  if (!have_header) throw LoadError(origin, 0, "missing batch header");
  if (batch.transitions.empty()) throw LoadError(origin, lineno, "batch has no transitions");
  return batch;
}

void save_batch(const Batch& batch, const std::string& path) {
  text::write_file(path, batch_to_jsonl(batch));
}

Batch load_batch(const std::string& path) { return batch_from_jsonl(text::read_file(path), path); }

void save_states(const std::vector<State>& states, const std::string& path) {
  std::string out;
  for (const auto& s : states) out += "{\"s\":" + text::number_array(s.values()) + "}\n";
  text::write_file(path, out);
}

std::vector<State> load_states(const std::string& path) {
  const std::string contents = text::read_file(path);
  std::istringstream in(contents);
  std::string line;
  std::vector<State> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto v = nlohmann::json::parse(line).at("s").get<std::vector<double>>();
      if (v.empty() || v.size() > kMaxStateDim) throw ContractViolation("bad state dimension");
      out.emplace_back(std::span<const double>(v));
    } catch (const std::exception& e) {
      throw LoadError(path, lineno, std::string("malformed state record: ") + e.what());
    }
  }
  if (out.empty()) throw LoadError(path, 0, "no states");
  return out;
}

}  // namespace fpsrl
