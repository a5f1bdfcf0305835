#include "fpsrl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "fpsrl/text_format.hpp"

namespace fpsrl {

namespace pt = boost::property_tree;

std::uint64_t ExperimentConfig::seed(SeedStage stage) const {
  const std::optional<std::uint64_t>* explicit_seed = nullptr;
  switch (stage) {
    case SeedStage::Data: explicit_seed = &data_seed; break;
    case SeedStage::Model: explicit_seed = &model_seed; break;
    case SeedStage::Swarm: explicit_seed = &swarm_seed; break;
    case SeedStage::TrainStates: explicit_seed = &train_states_seed; break;
    case SeedStage::TestStates: explicit_seed = &test_states_seed; break;
  }
  if (explicit_seed && *explicit_seed) return **explicit_seed;
  return Rng::derive_seed(master_seed, {static_cast<std::uint64_t>(stage) + 1});
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
  };
  require(batch_size >= 10, "data.batch_size must be at least 10");
  require(episode_len >= 1, "data.episode_len must be positive");
  require(!depths.empty(), "model.depths must list at least one depth");
  for (std::size_t d : depths) require(d >= 1 && d <= 8, "model.depths entries must be in 1..8");
  require(width >= 1 && width <= 32, "model.width must be in 1..32");
  require(epochs >= 1 && minibatch >= 1 && max_updates >= 1, "model training budget must be positive");
  require(learning_rate > 0.0, "model.learning_rate must be positive");
  require(particles >= 1, "swarm.particles must be positive");
  require(inertia >= 0.0 && cognitive >= 0.0 && social >= 0.0, "swarm coefficients must be nonnegative");
  require(rules >= 1, "policy.rules must be positive");
  require(!symmetric || rules % 2 == 0, "symmetric policies need an even rule count");
  require(horizon > 1, "policy.horizon must be greater than 1");
  require(q >= 0.0 && q <= 1.0, "policy.q must lie in [0, 1]");
  require(train_states >= 1 && test_states >= 1, "start-state counts must be positive");
  require(success_hold >= 1 && success_hold <= static_cast<std::size_t>(horizon) + 1,
          "policy.success_hold must be in 1..horizon+1");
  require(min_success_rate >= 0.0 && min_success_rate <= 1.0,
          "thresholds.min_success_rate must lie in [0, 1]");
  require(threads >= 1, "run.threads must be positive");
}

ExperimentConfig defaults_for(BenchmarkId id) {
  ExperimentConfig c;
  c.benchmark = id;
  c.exploration = default_policy_kind(id);
  c.episode_len = default_episode_len(id);
  switch (id) {
    case BenchmarkId::MountainCar:
      c.batch_size = 10000;
      c.particles = 100;
      c.rules = 2;
      c.symmetric = false;
      c.horizon = 200;
      c.train_states = 100;
      c.test_states = 100;
      c.min_fitness = -43.0;
      break;
    case BenchmarkId::CartPoleBalance:
      c.batch_size = 100000;
      c.particles = 100;
      c.rules = 2;
      c.symmetric = true;
      c.horizon = 100;
      c.train_states = 100;
      c.test_states = 1000;
      c.min_fitness = -1.5;
      break;
    case BenchmarkId::CartPoleSwingUp:
      c.batch_size = 10000;
      c.particles = 1000;
      c.rules = 4;
      c.symmetric = true;
      c.horizon = 500;
      c.train_states = 50;
      c.test_states = 1000;
      c.min_fitness = -50.0;
      c.min_success_rate = 0.99;
      break;
  }
  return c;
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("configuration key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("configuration key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw ConfigError("configuration key '" + key + "': empty list entry");
    out.push_back(parse_number<std::size_t>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// Visits every key with a getter/setter pair so parsing and emitting share one table.
template <class Visitor>
void visit_fields(ExperimentConfig& c, Visitor&& v) {
  v.size("data.batch_size", c.batch_size);
  v.size("data.episode_len", c.episode_len);
  v.custom("data.exploration", [&] { return std::string(to_string(c.exploration)); },
           [&](const std::string& s) { c.exploration = parse_policy_kind(s); });
  v.custom("model.depths", [&] { return join(c.depths); },
           [&](const std::string& s) { c.depths = parse_list("model.depths", s); });
  v.size("model.width", c.width);
  v.size("model.epochs", c.epochs);
  v.size("model.minibatch", c.minibatch);
  v.real("model.learning_rate", c.learning_rate);
  v.size("model.max_updates", c.max_updates);
  v.size("swarm.particles", c.particles);
  v.size("swarm.iterations", c.iterations);
  v.size("swarm.radius", c.radius);
  v.real("swarm.inertia", c.inertia);
  v.real("swarm.cognitive", c.cognitive);
  v.real("swarm.social", c.social);
  v.size("policy.rules", c.rules);
  v.custom("policy.symmetric", [&] { return std::string(c.symmetric ? "true" : "false"); },
           [&](const std::string& s) { c.symmetric = parse_bool("policy.symmetric", s); });
  v.custom("policy.horizon", [&] { return std::to_string(c.horizon); },
           [&](const std::string& s) { c.horizon = parse_number<int>("policy.horizon", s); });
  v.real("policy.q", c.q);
  v.size("policy.train_states", c.train_states);
  v.size("policy.test_states", c.test_states);
  v.size("policy.success_hold", c.success_hold);
  v.real("thresholds.min_fitness", c.min_fitness);
  v.real("thresholds.min_success_rate", c.min_success_rate);
  v.u64("seeds.master", c.master_seed);
  v.opt("seeds.data", c.data_seed);
  v.opt("seeds.model", c.model_seed);
  v.opt("seeds.swarm", c.swarm_seed);
  v.opt("seeds.train_states", c.train_states_seed);
  v.opt("seeds.test_states", c.test_states_seed);
  v.custom("run.out_dir", [&] { return c.out_dir; }, [&](const std::string& s) { c.out_dir = s; });
  v.size("run.threads", c.threads);
}

struct Reader {
  const pt::ptree& tree;
  std::optional<std::string> get(const std::string& key) const {
    if (auto v = tree.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }
  void size(const std::string& k, std::size_t& f) const {
    if (auto v = get(k)) f = parse_number<std::size_t>(k, *v);
  }
  void u64(const std::string& k, std::uint64_t& f) const {
    if (auto v = get(k)) f = parse_number<std::uint64_t>(k, *v);
  }
  void real(const std::string& k, double& f) const {
    if (auto v = get(k)) f = parse_number<double>(k, *v);
  }
  void opt(const std::string& k, std::optional<std::uint64_t>& f) const {
    if (auto v = get(k); v && !v->empty()) f = parse_number<std::uint64_t>(k, *v);
  }
  template <class Get, class Set>
  void custom(const std::string& k, Get&&, Set&& set) const {
    if (auto v = get(k)) set(*v);
  }
};

struct Writer {
  pt::ptree& tree;
  void size(const std::string& k, std::size_t f) const { tree.put(k, std::to_string(f)); }
  void u64(const std::string& k, std::uint64_t f) const { tree.put(k, std::to_string(f)); }
  void real(const std::string& k, double f) const { tree.put(k, text::number(f)); }
  void opt(const std::string& k, const std::optional<std::uint64_t>& f) const {
    if (f) tree.put(k, std::to_string(*f));
  }
  template <class Get, class Set>
  void custom(const std::string& k, Get&& get, Set&&) const {
    tree.put(k, get());
  }
};

const char* const kSections[] = {"experiment", "data", "model", "swarm", "policy",
                                 "thresholds", "seeds", "run"};

}  // namespace

ExperimentConfig parse_config(const std::string& contents, std::optional<BenchmarkId> benchmark) {
  pt::ptree tree;
  std::istringstream in(contents);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    bool known = false;
    for (const char* s : kSections) known = known || section == s;
    if (!known) throw ConfigError("unknown configuration section [" + section + "]");
    (void)body;
  }
  BenchmarkId id = BenchmarkId::MountainCar;
  if (benchmark)
    id = *benchmark;
  else if (auto name = tree.get_optional<std::string>("experiment.benchmark"))
    id = parse_benchmark(*name);
  else
    throw ConfigError("configuration does not name a benchmark");

  ExperimentConfig c = defaults_for(id);
  // Reject keys the table does not know so typos do not pass silently.
  pt::ptree known;
  known.put("experiment.benchmark", "");
  visit_fields(c, Writer{known});
  known.put("seeds.data", "");
  known.put("seeds.model", "");
  known.put("seeds.swarm", "");
  known.put("seeds.train_states", "");
  known.put("seeds.test_states", "");
  for (const auto& [section, body] : tree)
    for (const auto& [key, value] : body)
      if (!known.get_child_optional(pt::ptree::path_type(section + "." + key)))
        throw ConfigError("unknown configuration key '" + section + "." + key + "'");

  visit_fields(c, Reader{tree});
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<BenchmarkId> benchmark) {
  return parse_config(text::read_file(path), benchmark);
}

std::string emit_config(const ExperimentConfig& config) {
  pt::ptree tree;
  tree.put("experiment.benchmark", std::string(to_string(config.benchmark)));
  ExperimentConfig copy = config;
  visit_fields(copy, Writer{tree});
  std::ostringstream out;
  pt::write_ini(out, tree);
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  // Where results go and how many workers compute them do not change them.
  ExperimentConfig c = config;
  c.out_dir.clear();
  c.threads = 1;
  return text::hex64(text::fnv1a(emit_config(c)));
}

}  // namespace fpsrl
