// fpsrl: command-line front end of the fuzzy particle swarm RL pipeline.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fpsrl/config.hpp"
#include "fpsrl/error.hpp"
#include "fpsrl/pipeline.hpp"

namespace {

struct Options {
  std::string benchmark;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;

  std::optional<std::size_t> size, particles, iters, train_states, test_states;

  std::string batch, model, policy, states;
  std::string target = "true";
  bool check = false;
  std::optional<double> min_fitness, min_success_rate;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--benchmark", o.benchmark, "mc, cpb or cpsu")
      ->check(CLI::IsMember({"mc", "cpb", "cpsu"}));
  cmd->add_option("--config", o.config, "INI configuration file");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory (default $FPSRL_OUT or ./fpsrl_out)");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

void add_thresholds(CLI::App* cmd, Options& o) {
  cmd->add_flag("--check", o.check, "exit with status 3 when the configured bars are missed");
  cmd->add_option("--min-fitness", o.min_fitness, "fitness bar (implies --check)");
  cmd->add_option("--min-success-rate", o.min_success_rate, "success-rate bar (implies --check)");
}

fpsrl::ExperimentConfig build_config(const Options& o) {
  std::optional<fpsrl::BenchmarkId> id;
  if (!o.benchmark.empty()) id = fpsrl::parse_benchmark(o.benchmark);
  fpsrl::ExperimentConfig c;
  if (!o.config.empty())
    c = fpsrl::load_config(o.config, id);
  else if (id)
    c = fpsrl::defaults_for(*id);
  else
    throw fpsrl::Error("--benchmark is required (or a --config naming one)",
                       fpsrl::exit_code::kUsage);
  if (o.seed) c.master_seed = *o.seed;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.size) c.batch_size = *o.size;
  if (o.particles) c.particles = *o.particles;
  if (o.iters) c.iterations = *o.iters;
  if (o.train_states) c.train_states = *o.train_states;
  if (o.test_states) c.test_states = *o.test_states;
  if (o.min_fitness) c.min_fitness = *o.min_fitness;
  if (o.min_success_rate) c.min_success_rate = *o.min_success_rate;
  c.validate();
  return c;
}

bool checking(const Options& o) { return o.check || o.min_fitness || o.min_success_rate; }

std::string or_default(const std::string& given, const std::string& fallback) {
  return given.empty() ? fallback : given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy particle swarm reinforcement learning"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "record a transition batch with an exploration policy");
  add_common(gen, o);
  gen->add_option("--size", o.size, "number of transitions")->check(CLI::PositiveNumber);

  auto* tm = app.add_subcommand("train-model", "train the world-model networks on a batch");
  add_common(tm, o);
  tm->add_option("--batch", o.batch, "batch file (default <out>/batch.jsonl)");

  auto* tp = app.add_subcommand("train-policy", "optimize a fuzzy policy on the world model");
  add_common(tp, o);
  tp->add_option("--model", o.model, "model file (default <out>/model.json)");
  tp->add_option("--particles", o.particles, "swarm size")->check(CLI::PositiveNumber);
  tp->add_option("--iters", o.iters, "swarm iterations");
  tp->add_option("--train-states", o.train_states, "start states per fitness evaluation")
      ->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("evaluate", "evaluate a policy on the model and/or true dynamics");
  add_common(ev, o);
  ev->add_option("--policy", o.policy, "policy file (default <out>/policy.jsonl)");
  ev->add_option("--model", o.model, "model file (default <out>/model.json)");
  ev->add_option("--target", o.target, "model, true or both")
      ->check(CLI::IsMember({"model", "true", "both"}));
  ev->add_option("--states", o.states, "start-state file (default: sampled from the test seed)");
  ev->add_option("--test-states", o.test_states, "number of sampled test states")
      ->check(CLI::PositiveNumber);
  add_thresholds(ev, o);

  auto* rd = app.add_subcommand("render", "draw the rules of a policy as text and SVG");
  add_common(rd, o);
  rd->add_option("--policy", o.policy, "policy file (default <out>/policy.jsonl)");

  auto* rp = app.add_subcommand("reproduce", "run the whole pipeline from one master seed");
  add_common(rp, o);
  rp->add_option("--size", o.size, "number of transitions")->check(CLI::PositiveNumber);
  rp->add_option("--particles", o.particles, "swarm size")->check(CLI::PositiveNumber);
  rp->add_option("--iters", o.iters, "swarm iterations");
  rp->add_option("--train-states", o.train_states, "start states per fitness evaluation")
      ->check(CLI::PositiveNumber);
  rp->add_option("--test-states", o.test_states, "number of test states")
      ->check(CLI::PositiveNumber);
  add_thresholds(rp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fpsrl::exit_code::kUsage;
  }

  try {
    const fpsrl::ExperimentConfig config = build_config(o);
    const fpsrl::ArtifactPaths paths = fpsrl::artifact_paths(fpsrl::resolve_out_dir(config));
    std::ostream& log = std::cout;

    if (gen->parsed()) {
      fpsrl::cmd_gen_data(config, paths, log);
    } else if (tm->parsed()) {
      fpsrl::cmd_train_model(config, or_default(o.batch, paths.batch), paths, log);
    } else if (tp->parsed()) {
      fpsrl::cmd_train_policy(config, or_default(o.model, paths.model), paths, log);
    } else if (ev->parsed()) {
      fpsrl::EvaluateOptions eo;
      eo.target = fpsrl::parse_eval_target(o.target);
      eo.model_path = or_default(o.model, paths.model);
      eo.states_path = o.states;
      eo.check_thresholds = checking(o);
      return fpsrl::cmd_evaluate(config, or_default(o.policy, paths.policy), eo, paths, log)
          .exit_code;
    } else if (rd->parsed()) {
      fpsrl::cmd_render(config, or_default(o.policy, paths.policy), paths, log);
    } else if (rp->parsed()) {
      return fpsrl::cmd_reproduce(config, paths, checking(o), log).evaluation.exit_code;
    }
    return fpsrl::exit_code::kSuccess;
  } catch (const fpsrl::Error& e) {
    std::cerr << "fpsrl: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "fpsrl: " << e.what() << "\n";
    return fpsrl::exit_code::kDataError;
  }
}
