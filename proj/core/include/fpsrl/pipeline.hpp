#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpsrl/config.hpp"
#include "fpsrl/data.hpp"
#include "fpsrl/fuzzy.hpp"
#include "fpsrl/rl_eval.hpp"
#include "fpsrl/swarm.hpp"
#include "fpsrl/worldmodel.hpp"

namespace fpsrl {

/// File names inside an output directory.
struct ArtifactPaths {
  std::string dir;
  std::string batch, model, policy, history, train_states, test_states, evaluation, render_svg,
      render_txt, manifest;
};

ArtifactPaths artifact_paths(const std::string& dir);

/// config.out_dir if set, else $FPSRL_OUT, else "fpsrl_out".
std::string resolve_out_dir(const ExperimentConfig& config);

/// Generates a batch and writes it with a reward histogram on `log`.
Batch cmd_gen_data(const ExperimentConfig& config, const ArtifactPaths& paths, std::ostream& log);

/// Trains every configured depth per network and prints the error table.
WorldModel cmd_train_model(const ExperimentConfig& config, const std::string& batch_path,
                           const ArtifactPaths& paths, std::ostream& log);

struct PolicyTraining {
  PolicyFile policy;
  PsoResult swarm;
};

/// Runs the swarm on the model fitness and writes the policy and its history.
PolicyTraining cmd_train_policy(const ExperimentConfig& config, const std::string& model_path,
                                const ArtifactPaths& paths, std::ostream& log);

enum class EvalTarget { Model, True, Both };

EvalTarget parse_eval_target(const std::string& name);

struct EvaluationOutcome {
  std::optional<EvaluationReport> model;
  std::optional<EvaluationReport> truth;
  /// exit_code::kThresholdFailure if a checked bar was missed.
  int exit_code = 0;
};

struct EvaluateOptions {
  EvalTarget target = EvalTarget::True;
  std::string model_path;   // required for the model target
  std::string states_path;  // empty: sample test states from the test seed
  bool check_thresholds = false;
};

/// Evaluates a policy on the persisted test states and writes the report.
EvaluationOutcome cmd_evaluate(const ExperimentConfig& config, const std::string& policy_path,
                               const EvaluateOptions& options, const ArtifactPaths& paths,
                               std::ostream& log);

/// Sample states shown in the rendering of each benchmark.
std::vector<State> render_examples(BenchmarkId id);

Rendering cmd_render(const ExperimentConfig& config, const std::string& policy_path,
                     const ArtifactPaths& paths, std::ostream& log);

struct ReproduceOutcome {
  EvaluationOutcome evaluation;
  std::string manifest;
};

/// gen-data, train-model, train-policy, evaluate and render in one go, plus a manifest.
ReproduceOutcome cmd_reproduce(const ExperimentConfig& config, const ArtifactPaths& paths,
                               bool check_thresholds, std::ostream& log);

}  // namespace fpsrl
