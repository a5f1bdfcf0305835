// Micro-benchmarks of the inner loops that dominate a pipeline run.

#include <benchmark/benchmark.h>

#include <cmath>

#include "fpsrl/activation.hpp"
#include "fpsrl/rl_eval.hpp"
#include "fpsrl/swarm.hpp"
#include "fpsrl/worldmodel.hpp"

using namespace fpsrl;

namespace {

const WorldModel& mc_model() {
  static const WorldModel model = [] {
    const Batch batch =
        generate_batch(BenchmarkSpec::mountain_car_spec(), 2000, 200, PolicyKind::UniformRandom, 1);
    WorldModelTrainConfig cfg;
    cfg.depths = {2};
    cfg.train.max_updates = 2000;
    return train_world_model(batch, cfg);
  }();
  return model;
}

FuzzyPolicyParams some_policy(const BenchmarkSpec& spec, std::size_t rules) {
  Rng rng(3);
  const SymmetrySpec sym{false, rules};
  const SearchBox box = policy_search_box(spec, sym);
  std::vector<double> x(box.lower.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(box.lower[k], box.upper[k]);
  return decode_policy(x, spec.state_dim, sym, spec.action_max);
}

void BM_TrueStep(benchmark::State& st) {
  const BenchmarkSpec spec = BenchmarkSpec::for_id(static_cast<BenchmarkId>(st.range(0)));
  Rng rng(1);
  State s = sample_start_states(spec, Region::Test, 1, rng).front();
  for (auto _ : st) {
    const StepResult r = true_step(spec, s, 0.3 * spec.action_max);
    benchmark::DoNotOptimize(r);
  }
  st.SetLabel(std::string(to_string(spec.id)));
}
BENCHMARK(BM_TrueStep)->Arg(0)->Arg(1)->Arg(2);

void BM_ArctanBatch(benchmark::State& st) {
  std::vector<double> v(1024);
  Rng rng(2);
  for (double& x : v) x = rng.uniform(-4, 4);
  std::vector<double> w = v;
  for (auto _ : st) {
    w = v;
    activation::arctan_inplace(w);
    benchmark::DoNotOptimize(w.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_ArctanBatch);

void BM_PolicyOutput(benchmark::State& st) {
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_swing_up_spec();
  const FuzzyPolicyParams p = some_policy(spec, 4);
  const State s{0.4, -1.0, 0.2, 0.5};
  for (auto _ : st) benchmark::DoNotOptimize(policy_output(p, s));
}
BENCHMARK(BM_PolicyOutput);

void BM_ModelStepBatch(benchmark::State& st) {
  const WorldModel& m = mc_model();
  const auto n = static_cast<std::size_t>(st.range(0));
  Rng rng(4);
  const std::vector<State> states =
      sample_start_states(BenchmarkSpec::mountain_car_spec(), Region::Test, n, rng);
  std::vector<double> actions(n, 0.5), rewards(n);
  std::vector<State> next(n);
  for (auto _ : st) {
    model_step_batch(m, states, actions, next, rewards);
    benchmark::DoNotOptimize(rewards.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ModelStepBatch)->Arg(1)->Arg(100);

void BM_ModelFitness(benchmark::State& st) {
  const ModelEnvironment env(mc_model());
  Rng rng(5);
  EvaluationSpec spec;
  spec.horizon = 200;
  spec.starts = sample_start_states(env.spec(), Region::Test, 100, rng);
  spec.env = &env;
  const PolicyEncoding enc{2, SymmetrySpec{false, 2}, 1.0};
  const std::vector<double> x = encode(some_policy(env.spec(), 2));
  for (auto _ : st) benchmark::DoNotOptimize(fitness(x, enc, spec));
}
BENCHMARK(BM_ModelFitness)->Unit(benchmark::kMillisecond);

void BM_PsoSphere(benchmark::State& st) {
  SwarmConfig c;
  c.lower.assign(10, -5.0);
  c.upper.assign(10, 5.0);
  c.particles = 50;
  c.iterations = 200;
  const auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += (v - 1.0) * (v - 1.0);
    return -s;
  };
  for (auto _ : st) benchmark::DoNotOptimize(pso_optimize(f, c).best_fitness);
}
BENCHMARK(BM_PsoSphere)->Unit(benchmark::kMillisecond);

void BM_MlpTrainUpdates(benchmark::State& st) {
  const Batch batch =
      generate_batch(BenchmarkSpec::mountain_car_spec(), 2000, 200, PolicyKind::UniformRandom, 6);
  const Dataset data = world_model_datasets(batch, -1).front();
  TrainConfig cfg;
  cfg.max_updates = 1000;
  for (auto _ : st) {
    Rng rng(7);
    benchmark::DoNotOptimize(train_mlp(Mlp::random(Mlp::shape(3, 2), rng), data, data, data, cfg).train_mse);
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_MlpTrainUpdates)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
