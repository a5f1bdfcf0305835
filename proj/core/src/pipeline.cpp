#include "fpsrl/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include "fpsrl/text_format.hpp"
#include "json.hpp"

namespace fpsrl {

ArtifactPaths artifact_paths(const std::string& dir) {
  const std::filesystem::path d(dir);
  auto p = [&](const char* name) { return (d / name).string(); };
  return {dir,
          p("batch.jsonl"),
          p("model.json"),
          p("policy.jsonl"),
          p("history.jsonl"),
          p("train_states.jsonl"),
          p("test_states.jsonl"),
          p("evaluation.jsonl"),
          p("render.svg"),
          p("render.txt"),
          p("manifest.json")};
}

std::string resolve_out_dir(const ExperimentConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("FPSRL_OUT"); env && *env) return env;
  return "fpsrl_out";
}

namespace {

void ensure_dir(const ArtifactPaths& paths) {
  std::error_code ec;
  std::filesystem::create_directories(paths.dir, ec);
  if (ec) throw Error("cannot create output directory " + paths.dir + ": " + ec.message());
}

void check_benchmark(const ExperimentConfig& config, BenchmarkId found, const std::string& what) {
  if (found != config.benchmark)
    throw ContractViolation(what + " belongs to benchmark " + std::string(to_string(found)) +
                            ", not " + std::string(to_string(config.benchmark)));
}

}  // namespace

Batch cmd_gen_data(const ExperimentConfig& config, const ArtifactPaths& paths, std::ostream& log) {
  config.validate();
  ensure_dir(paths);
  const BenchmarkSpec spec = BenchmarkSpec::for_id(config.benchmark);
  Batch batch = generate_batch(spec, config.batch_size, config.episode_len, config.exploration,
                               config.seed(SeedStage::Data));
  save_batch(batch, paths.batch);

  std::map<double, std::size_t> histogram;
  for (double r : reward_codomain(spec.id)) histogram[r] = 0;
  for (const auto& t : batch.transitions) ++histogram[t.r];
  const std::size_t episodes =
      batch.transitions.empty() ? 0 : static_cast<std::size_t>(batch.transitions.back().trajectory) + 1;

  std::string hist = "{";
  bool first = true;
  for (const auto& [r, n] : histogram) {
    hist += (first ? "\"" : ",\"") + text::number(r) + "\":" + std::to_string(n);
    first = false;
  }
  hist += "}";
  log << "{\"record\":\"batch\",\"benchmark\":" << text::quoted(to_string(spec.id))
      << ",\"transitions\":" << batch.size() << ",\"episodes\":" << episodes
      << ",\"policy_kind\":" << text::quoted(to_string(batch.policy_kind))
      << ",\"reward_histogram\":" << hist << ",\"file\":" << text::quoted(paths.batch) << "}\n";
  return batch;
}

WorldModel cmd_train_model(const ExperimentConfig& config, const std::string& batch_path,
                           const ArtifactPaths& paths, std::ostream& log) {
  config.validate();
  ensure_dir(paths);
  const Batch batch = load_batch(batch_path);
  check_benchmark(config, batch.benchmark, batch_path);

  WorldModelTrainConfig wc;
  wc.depths = config.depths;
  wc.width = config.width;
  wc.train.max_epochs = config.epochs;
  wc.train.batch_size = config.minibatch;
  wc.train.learning_rate = config.learning_rate;
  wc.train.max_updates = config.max_updates;
  wc.seed = config.seed(SeedStage::Model);
  wc.threads = config.threads;
  WorldModel model = train_world_model(batch, wc);
  save_world_model(model, paths.model);
  log << format_split_report(model.report);
  return model;
}

PolicyTraining cmd_train_policy(const ExperimentConfig& config, const std::string& model_path,
                                const ArtifactPaths& paths, std::ostream& log) {
  config.validate();
  ensure_dir(paths);
  const BenchmarkSpec spec = BenchmarkSpec::for_id(config.benchmark);
  ModelEnvironment env(load_world_model(model_path));
  check_benchmark(config, env.model().benchmark, model_path);

  Rng state_rng(config.seed(SeedStage::TrainStates));
  const auto starts = sample_start_states(spec, Region::Test, config.train_states, state_rng);
  save_states(starts, paths.train_states);

  PolicyEncoding encoding;
  encoding.state_dim = spec.state_dim;
  encoding.symmetry = {config.symmetric, config.rules};
  encoding.symmetry.validate();
  encoding.scale = spec.action_max;

  EvaluationSpec eval;
  eval.horizon = config.horizon;
  eval.q = config.q;
  eval.starts = starts;
  eval.env = &env;
  eval.validate();

  const SearchBox box = policy_search_box(spec, encoding.symmetry);
  SwarmConfig sc;
  sc.particles = config.particles;
  sc.iterations = config.iterations;
  sc.inertia = config.inertia;
  sc.cognitive = config.cognitive;
  sc.social = config.social;
  sc.radius = config.radius;
  sc.lower = box.lower;
  sc.upper = box.upper;
  sc.seed = config.seed(SeedStage::Swarm);
  sc.threads = config.threads;

  std::string history;
  const std::size_t every = std::max<std::size_t>(1, config.iterations / 10);
  PsoCallbacks callbacks;
  callbacks.on_iteration = [&](const IterationRecord& rec) {
    history += to_json_line(rec) + "\n";
    if (rec.iteration % every == 0 || rec.iteration == config.iterations) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "iteration %5zu  best %.4f  mean %.4f\n", rec.iteration,
                    rec.best_fitness, rec.mean_fitness);
      log << buf << std::flush;
    }
  };
  PolicyTraining out;
  out.swarm = pso_optimize(
      [&](std::span<const double> x) { return fitness(x, encoding, eval); }, sc, callbacks);
  out.policy.benchmark = spec.id;
  out.policy.symmetric = config.symmetric;
  out.policy.params =
      decode_policy(out.swarm.best_position, spec.state_dim, encoding.symmetry, encoding.scale);
  save_policy(out.policy, paths.policy);
  text::write_file(paths.history, history);
  return out;
}

EvalTarget parse_eval_target(const std::string& name) {
  if (name == "model") return EvalTarget::Model;
  if (name == "true") return EvalTarget::True;
  if (name == "both") return EvalTarget::Both;
  throw ConfigError("unknown evaluation target '" + name + "' (expected model, true or both)");
}

EvaluationOutcome cmd_evaluate(const ExperimentConfig& config, const std::string& policy_path,
                               const EvaluateOptions& options, const ArtifactPaths& paths,
                               std::ostream& log) {
  config.validate();
  ensure_dir(paths);
  const BenchmarkSpec spec = BenchmarkSpec::for_id(config.benchmark);
  const PolicyFile policy = load_policy(policy_path);
  check_benchmark(config, policy.benchmark, policy_path);

  std::vector<State> starts;
  if (!options.states_path.empty()) {
    starts = load_states(options.states_path);
    for (const auto& s : starts)
      if (s.size() != spec.state_dim)
        throw LoadError(options.states_path, 0, "state dimension does not match the benchmark");
  } else {
    Rng rng(config.seed(SeedStage::TestStates));
    starts = sample_start_states(spec, Region::Test, config.test_states, rng);
  }
  save_states(starts, paths.test_states);

  const auto predicate = default_success_predicate(spec, config.success_hold);
  EvaluationOutcome out;
  std::string records;
  if (options.target != EvalTarget::True) {
    if (options.model_path.empty()) throw ConfigError("the model target needs a model file");
    ModelEnvironment env(load_world_model(options.model_path));
    check_benchmark(config, env.model().benchmark, options.model_path);
    out.model = evaluate_policy(env, policy.params, starts, config.horizon, config.q, predicate);
    records += to_jsonl(*out.model);
    log << format_report(*out.model);
  }
  if (options.target != EvalTarget::Model) {
    TrueEnvironment env(spec);
    out.truth = evaluate_policy(env, policy.params, starts, config.horizon, config.q, predicate);
    records += to_jsonl(*out.truth);
    log << format_report(*out.truth);
  }
  text::write_file(paths.evaluation, records);

  if (options.check_thresholds) {
    const EvaluationReport& judged = out.truth ? *out.truth : *out.model;
    bool ok = judged.fitness >= config.min_fitness;
    if (config.min_success_rate > 0.0) ok = ok && judged.success_rate >= config.min_success_rate;
    char buf[160];
    std::snprintf(buf, sizeof buf, "threshold %s: F %.4f (bar %.4f), success %.4f (bar %.4f)\n",
                  ok ? "met" : "MISSED", judged.fitness, config.min_fitness, judged.success_rate,
                  config.min_success_rate);
    log << buf;
    if (!ok) out.exit_code = exit_code::kThresholdFailure;
  }
  return out;
}

std::vector<State> render_examples(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::MountainCar: return {{-1.0, -1.0}, {-0.5, 0.5}, {0.3, 1.5}};
    case BenchmarkId::CartPoleBalance:
      return {{0.0, 0.0, 2.3, 0.0}, {0.1, 0.0, 0.0, 0.0}, {-0.2, 0.5, -1.0, 0.0}};
    case BenchmarkId::CartPoleSwingUp:
      return {{3.0, 0.0, 0.0, 0.0}, {1.5, -2.0, 0.3, 0.0}, {0.1, 0.0, 0.0, 0.0}};
  }
  return {};
}

Rendering cmd_render(const ExperimentConfig& config, const std::string& policy_path,
                     const ArtifactPaths& paths, std::ostream& log) {
  ensure_dir(paths);
  const PolicyFile policy = load_policy(policy_path);
  check_benchmark(config, policy.benchmark, policy_path);
  const BenchmarkSpec spec = BenchmarkSpec::for_id(policy.benchmark);
  Rendering r = render_rules(policy.params, spec.labels, spec.operating_range,
                             render_examples(policy.benchmark));
  text::write_file(paths.render_txt, r.text);
  text::write_file(paths.render_svg, r.svg);
  log << r.text;
  return r;
}

ReproduceOutcome cmd_reproduce(const ExperimentConfig& config, const ArtifactPaths& paths,
                               bool check_thresholds, std::ostream& log) {
  config.validate();
  ensure_dir(paths);
  cmd_gen_data(config, paths, log);
  cmd_train_model(config, paths.batch, paths, log);
  cmd_train_policy(config, paths.model, paths, log);
  EvaluateOptions eo;
  eo.target = EvalTarget::Both;
  eo.model_path = paths.model;
  eo.check_thresholds = check_thresholds;
  ReproduceOutcome out;
  out.evaluation = cmd_evaluate(config, paths.policy, eo, paths, log);
  cmd_render(config, paths.policy, paths, log);

  nlohmann::ordered_json m;
  m["format"] = "fpsrl-manifest";
  m["format_version"] = 1;
  m["benchmark"] = std::string(to_string(config.benchmark));
  m["config_hash"] = config_hash(config);
  m["config"] = emit_config(config);
  m["seeds"] = {{"master", config.master_seed},
                {"data", config.seed(SeedStage::Data)},
                {"model", config.seed(SeedStage::Model)},
                {"swarm", config.seed(SeedStage::Swarm)},
                {"train_states", config.seed(SeedStage::TrainStates)},
                {"test_states", config.seed(SeedStage::TestStates)}};
  nlohmann::ordered_json artifacts;
  for (const auto& [name, file] : {std::pair<const char*, const std::string*>{"batch", &paths.batch},
                                   {"model", &paths.model},
                                   {"policy", &paths.policy},
                                   {"history", &paths.history},
                                   {"train_states", &paths.train_states},
                                   {"test_states", &paths.test_states},
                                   {"evaluation", &paths.evaluation},
                                   {"render_txt", &paths.render_txt},
                                   {"render_svg", &paths.render_svg}}) {
    artifacts[name] = {{"file", std::filesystem::path(*file).filename().string()},
                       {"fnv1a", text::hex64(text::fnv1a(text::read_file(*file)))}};
  }
  m["artifacts"] = artifacts;
  nlohmann::ordered_json results;
  if (out.evaluation.model) results["F_model"] = out.evaluation.model->fitness;
  if (out.evaluation.truth) {
    results["F_true"] = out.evaluation.truth->fitness;
    results["success_rate"] = out.evaluation.truth->success_rate;
  }
  m["results"] = results;
  out.manifest = m.dump(2) + "\n";
  text::write_file(paths.manifest, out.manifest);
  log << "manifest written to " << paths.manifest << "\n";
  return out;
}

}  // namespace fpsrl
