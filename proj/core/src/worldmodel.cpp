#include "fpsrl/worldmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "fpsrl/text_format.hpp"
#include "json.hpp"

namespace fpsrl {

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.inputs = data.inputs;
  out.x.reserve(idx.size() * data.inputs);
  out.y.reserve(idx.size());
  for (std::size_t i : idx) out.add(data.row(i), data.y[i]);
  return out;
}

}  // namespace

DatasetSplit split_dataset(const Batch& batch, std::uint64_t seed) {
  const std::size_t n = batch.size();
  if (n < 10) throw ConfigError("split_dataset: need at least 10 transitions, got " +
                                std::to_string(n));
  // Group sample indices by trajectory in order of first appearance.
  std::map<std::int64_t, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = group_of.try_emplace(batch.transitions[i].trajectory, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  if (groups.size() < 10) {
    // Too few episodes to hold out whole ones; fall back to samples.
    groups.clear();
    for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);

  const std::size_t held = groups.size() / 10;
  DatasetSplit split;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& target = k < held ? split.validation
                   : k < 2 * held ? split.generalization
                                  : split.train;
    const auto& g = groups[order[k]];
    target.insert(target.end(), g.begin(), g.end());
  }
  for (auto* v : {&split.train, &split.validation, &split.generalization})
    std::sort(v->begin(), v->end());
  return split;
}

double RegressionNet::predict(std::span<const double> raw_input) const {
  std::array<double, Mlp::kMaxWidth> z{};
  for (std::size_t j = 0; j < raw_input.size(); ++j) z[j] = input.normalize(j, raw_input[j]);
  return net.forward({z.data(), raw_input.size()}) * target_std + target_mean;
}

std::vector<std::string> world_model_network_names(BenchmarkId id) {
  if (id == BenchmarkId::MountainCar) return {"rho", "rho_dot", "r"};
  return {"theta", "theta_dot", "rho", "rho_dot", "r"};
}

std::vector<Dataset> world_model_datasets(const Batch& batch, int wrapped_dim) {
  if (batch.transitions.empty()) throw ContractViolation("world_model_datasets: empty batch");
  const std::size_t d = batch.transitions.front().s.size();
  std::vector<Dataset> sets(d + 1);
  std::vector<double> in(d + 1), rin(2 * d + 1);
  for (const auto& t : batch.transitions) {
    for (std::size_t j = 0; j < d; ++j) in[j] = t.s[j];
    in[d] = t.a;
    for (std::size_t j = 0; j < d; ++j) {
      double delta = t.s_next[j] - t.s[j];
      if (static_cast<int>(j) == wrapped_dim) delta = wrap_angle(delta);
      sets[j].add(in, delta);
    }
    std::copy(in.begin(), in.end(), rin.begin());
    for (std::size_t j = 0; j < d; ++j) rin[d + 1 + j] = t.s_next[j];
    sets[d].add(rin, t.r);
  }
  return sets;
}

RegressionNet fit_regression(const Dataset& data, const DatasetSplit& split,
                             const std::vector<std::size_t>& sizes, const TrainConfig& train,
                             std::uint64_t seed, DepthReport* report) {
  Dataset tr = subset(data, split.train);
  Dataset va = subset(data, split.validation);
  Dataset ge = subset(data, split.generalization);

  RegressionNet out;
  out.input = Normalizer::fit(tr.x, data.inputs);
  const Normalizer target = Normalizer::fit(tr.y, 1);
  out.target_mean = target.mean[0];
  out.target_std = target.stddev[0];
  for (Dataset* ds : {&tr, &va, &ge}) {
    for (std::size_t k = 0; k < ds->size(); ++k) {
      out.input.normalize({ds->x.data() + k * ds->inputs, ds->inputs});
      ds->y[k] = target.normalize(0, ds->y[k]);
    }
  }
  Rng rng = Rng::derive(seed, {1});
  TrainConfig cfg = train;
  cfg.seed = Rng::derive_seed(seed, {2});
  TrainResult res = train_mlp(Mlp::random(sizes, rng), tr, va, ge, cfg);
  out.net = std::move(res.net);
  if (report) {
    report->hidden_layers = out.net.hidden_layers();
    report->train_mse = res.train_mse;
    report->validation_mse = res.validation_mse;
    report->generalization_mse = res.generalization_mse;
    report->epochs = res.epochs;
    report->updates = res.updates;
  }
  return out;
}

WorldModel train_world_model(const Batch& batch, const WorldModelTrainConfig& config) {
  if (config.depths.empty()) throw ConfigError("train_world_model: no network depths given");
  const BenchmarkSpec spec = BenchmarkSpec::for_id(batch.benchmark);
  const DatasetSplit split = split_dataset(batch, Rng::derive_seed(config.seed, {0}));
  const auto sets = world_model_datasets(batch, spec.wrapped_dim);
  const auto names = world_model_network_names(batch.benchmark);
  const std::size_t nets = sets.size();
  const std::size_t depths = config.depths.size();

  struct Job {
    std::size_t net, depth;
    RegressionNet result;
    DepthReport report;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < nets; ++k)
    for (std::size_t l = 0; l < depths; ++l) jobs.push_back({k, l, {}, {}});

  auto run = [&](Job& job) {
    const auto sizes = Mlp::shape(sets[job.net].inputs, config.depths[job.depth], config.width);
    job.result = fit_regression(sets[job.net], split, sizes, config.train,
                                Rng::derive_seed(config.seed, {1, job.net, config.depths[job.depth]}),
                                &job.report);
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, jobs.size());
  if (threads == 1) {
    for (auto& job : jobs) run(job);
  } else {
    std::vector<std::jthread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < jobs.size(); i += threads) {
          try {
            run(jobs[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
  }

  WorldModel model;
  model.benchmark = batch.benchmark;
  model.state_dim = spec.state_dim;
  model.wrapped_dim = spec.wrapped_dim;
  model.report.train_size = split.train.size();
  model.report.validation_size = split.validation.size();
  model.report.generalization_size = split.generalization.size();
  for (std::size_t k = 0; k < nets; ++k) {
    NetworkReport nr;
    nr.name = names[k];
    std::size_t best_job = 0;
    for (std::size_t l = 0; l < depths; ++l) {
      const Job& job = jobs[k * depths + l];
      nr.depths.push_back(job.report);
      if (l == 0 || job.report.generalization_mse < nr.depths[nr.best].generalization_mse) {
        nr.best = l;
        best_job = k * depths + l;
      }
    }
    if (k + 1 < nets)
      model.deltas.push_back(jobs[best_job].result);
    else
      model.reward = jobs[best_job].result;
    model.report.networks.push_back(std::move(nr));
  }
  return model;
}

ModelStepResult model_step(const WorldModel& model, const State& s, double action) {
  ModelStepResult out;
  model_step_batch(model, {&s, 1}, {&action, 1}, {&out.next, 1}, {&out.reward, 1});
  return out;
}

void model_step_batch(const WorldModel& model, std::span<const State> states,
                      std::span<const double> actions, std::span<State> next,
                      std::span<double> rewards) {
  const std::size_t n = states.size();
  const std::size_t d = model.state_dim;
  if (actions.size() != n || next.size() != n || rewards.size() != n)
    throw ContractViolation("model_step_batch: span sizes differ");
  if (model.deltas.size() != d) throw ContractViolation("world model has wrong network count");

  thread_local std::vector<double> raw, norm, out, rraw;
  raw.resize(n * (d + 1));
  norm.resize(n * (d + 1));
  out.resize(n);
  rraw.resize(n * (2 * d + 1));
  for (std::size_t k = 0; k < n; ++k) {
    if (states[k].size() != d) throw ContractViolation("model_step: state dimension mismatch");
    for (std::size_t j = 0; j < d; ++j) raw[k * (d + 1) + j] = states[k][j];
    raw[k * (d + 1) + d] = actions[k];
    next[k] = State(d);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const RegressionNet& net = model.deltas[j];
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i <= d; ++i)
        norm[k * (d + 1) + i] = net.input.normalize(i, raw[k * (d + 1) + i]);
    net.net.forward_batch(norm, out);
    for (std::size_t k = 0; k < n; ++k) {
      double v = states[k][j] + (out[k] * net.target_std + net.target_mean);
      if (static_cast<int>(j) == model.wrapped_dim) v = wrap_angle(v);
      next[k][j] = v;
    }
  }
  const std::size_t rw = 2 * d + 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j <= d; ++j) rraw[k * rw + j] = raw[k * (d + 1) + j];
    for (std::size_t j = 0; j < d; ++j) rraw[k * rw + d + 1 + j] = next[k][j];
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < rw; ++i)
      rraw[k * rw + i] = model.reward.input.normalize(i, rraw[k * rw + i]);
  model.reward.net.forward_batch(rraw, out);
  for (std::size_t k = 0; k < n; ++k) {
    rewards[k] = out[k] * model.reward.target_std + model.reward.target_mean;
    if (!std::isfinite(rewards[k]) || !next[k].all_finite())
      throw ModelError("model_step: non-finite prediction");
  }
}

namespace {

nlohmann::json net_to_json(const RegressionNet& r, const std::string& name) {
  nlohmann::json j;
  j["name"] = name;
  j["layers"] = r.net.sizes();
  j["params"] = std::vector<double>(r.net.parameters().begin(), r.net.parameters().end());
  j["input_mean"] = r.input.mean;
  j["input_std"] = r.input.stddev;
  j["target_mean"] = r.target_mean;
  j["target_std"] = r.target_std;
  return j;
}

RegressionNet net_from_json(const nlohmann::json& j, std::size_t inputs) {
  RegressionNet r;
  const auto sizes = j.at("layers").get<std::vector<std::size_t>>();
  if (sizes.empty() || sizes.front() != inputs)
    throw ContractViolation("network input width does not match the benchmark");
  r.net = Mlp(sizes);
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != r.net.parameter_count())
    throw ContractViolation("network parameter count does not match its layer sizes");
  std::copy(params.begin(), params.end(), r.net.parameters().begin());
  r.input.mean = j.at("input_mean").get<std::vector<double>>();
  r.input.stddev = j.at("input_std").get<std::vector<double>>();
  if (r.input.mean.size() != inputs || r.input.stddev.size() != inputs)
    throw ContractViolation("normalizer width does not match the benchmark");
  r.target_mean = j.at("target_mean").get<double>();
  r.target_std = j.at("target_std").get<double>();
  return r;
}

}  // namespace

void save_world_model(const WorldModel& model, const std::string& path) {
  const auto names = world_model_network_names(model.benchmark);
  nlohmann::json j;
  j["format"] = "fpsrl-model";
  j["format_version"] = kModelFormatVersion;
  j["benchmark"] = std::string(to_string(model.benchmark));
  j["state_dim"] = model.state_dim;
  nlohmann::json deltas = nlohmann::json::array();
  for (std::size_t k = 0; k < model.deltas.size(); ++k) deltas.push_back(net_to_json(model.deltas[k], names[k]));
  j["deltas"] = deltas;
  j["reward"] = net_to_json(model.reward, "r");
  nlohmann::json rep;
  rep["train_size"] = model.report.train_size;
  rep["validation_size"] = model.report.validation_size;
  rep["generalization_size"] = model.report.generalization_size;
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& nr : model.report.networks) {
    nlohmann::json e;
    e["name"] = nr.name;
    e["best"] = nr.best;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : nr.depths)
      ds.push_back({{"hidden_layers", d.hidden_layers},
                    {"train_mse", d.train_mse},
                    {"validation_mse", d.validation_mse},
                    {"generalization_mse", d.generalization_mse},
                    {"epochs", d.epochs},
                    {"updates", d.updates}});
    e["depths"] = ds;
    nets.push_back(e);
  }
  rep["networks"] = nets;
  j["report"] = rep;
  text::write_file(path, j.dump() + "\n");
}

WorldModel load_world_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path, 0, std::string("malformed model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "fpsrl-model") throw LoadError(path, 0, "not a model file");
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw LoadError(path, 0, "unsupported model format version");
    WorldModel m;
    m.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
    const BenchmarkSpec spec = BenchmarkSpec::for_id(m.benchmark);
    m.state_dim = j.at("state_dim").get<std::size_t>();
    if (m.state_dim != spec.state_dim)
      throw LoadError(path, 0, "state dimension does not match benchmark " +
                                   std::string(to_string(m.benchmark)));
    m.wrapped_dim = spec.wrapped_dim;
    const auto& deltas = j.at("deltas");
    if (deltas.size() != m.state_dim) throw LoadError(path, 0, "wrong number of delta networks");
    for (const auto& dj : deltas) m.deltas.push_back(net_from_json(dj, m.state_dim + 1));
    m.reward = net_from_json(j.at("reward"), 2 * m.state_dim + 1);
    const auto& rep = j.at("report");
    m.report.train_size = rep.at("train_size").get<std::size_t>();
    m.report.validation_size = rep.at("validation_size").get<std::size_t>();
    m.report.generalization_size = rep.at("generalization_size").get<std::size_t>();
    for (const auto& e : rep.at("networks")) {
      NetworkReport nr;
      nr.name = e.at("name").get<std::string>();
      nr.best = e.at("best").get<std::size_t>();
      for (const auto& d : e.at("depths"))
        nr.depths.push_back({d.at("hidden_layers").get<std::size_t>(), d.at("train_mse").get<double>(),
                             d.at("validation_mse").get<double>(),
                             d.at("generalization_mse").get<double>(),
                             d.at("epochs").get<std::size_t>(), d.at("updates").get<std::size_t>()});
      m.report.networks.push_back(std::move(nr));
    }
    return m;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(path, 0, std::string("invalid model file: ") + e.what());
  }
}

std::string format_split_report(const SplitReport& report) {
  std::string out;
  char buf[160];
  out += "variable ";
  std::size_t cols = report.networks.empty() ? 0 : report.networks.front().depths.size();
  for (std::size_t c = 0; c < cols; ++c) {
    std::snprintf(buf, sizeof buf, "  %zu layer%s ", report.networks.front().depths[c].hidden_layers,
                  report.networks.front().depths[c].hidden_layers == 1 ? " " : "s");
    out += buf;
  }
  out += "\n";
  for (const auto& nr : report.networks) {
    std::snprintf(buf, sizeof buf, "%-9s", nr.name.c_str());
    out += buf;
    for (std::size_t c = 0; c < nr.depths.size(); ++c) {
      std::snprintf(buf, sizeof buf, " %10.3e%c", nr.depths[c].generalization_mse,
                    c == nr.best ? '*' : ' ');
      out += buf;
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof buf, "(generalization MSE, normalized units; * = selected; %zu/%zu/%zu samples)\n",
                report.train_size, report.validation_size, report.generalization_size);
  out += buf;
  return out;
}

}  // namespace fpsrl
