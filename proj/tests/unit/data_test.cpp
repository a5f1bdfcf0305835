#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fpsrl/data.hpp"
#include "fpsrl/text_format.hpp"
#include "fpsrl/worldmodel.hpp"

using namespace fpsrl;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("batch sizes and episode lengths") {
  for (BenchmarkId id :
       {BenchmarkId::MountainCar, BenchmarkId::CartPoleBalance, BenchmarkId::CartPoleSwingUp}) {
    const BenchmarkSpec spec = BenchmarkSpec::for_id(id);
    const Batch b = generate_batch(spec, 1000, default_episode_len(id), default_policy_kind(id), 3);
    CHECK(b.size() == 1000);
    for (const auto& t : b.transitions) CHECK(t.step < static_cast<std::int64_t>(default_episode_len(id)));
  }
  CHECK(default_episode_len(BenchmarkId::CartPoleSwingUp) == 500);
  CHECK(default_episode_len(BenchmarkId::CartPoleBalance) == 100);
  CHECK(default_policy_kind(BenchmarkId::MountainCar) == PolicyKind::UniformRandom);
  CHECK(default_policy_kind(BenchmarkId::CartPoleBalance) == PolicyKind::RandomWalk);
}

TEST_CASE("batches are deterministic and consistent with the true dynamics") {
  for (BenchmarkId id :
       {BenchmarkId::MountainCar, BenchmarkId::CartPoleBalance, BenchmarkId::CartPoleSwingUp}) {
    const BenchmarkSpec spec = BenchmarkSpec::for_id(id);
    const Batch a = generate_batch(spec, 5000, default_episode_len(id), default_policy_kind(id), 9);
    const Batch b = generate_batch(spec, 5000, default_episode_len(id), default_policy_kind(id), 9);
    CHECK(a == b);
    CHECK(validate_batch(spec, a) == a.size());
    Batch tampered = a;
    tampered.transitions[1234].r += 1.0;
    CHECK(validate_batch(spec, tampered) == 1234);
  }
}

TEST_CASE("uniform-random actions pass a chi-square check") {
  const BenchmarkSpec spec = BenchmarkSpec::mountain_car_spec();
  const Batch b = generate_batch(spec, 20000, 200, PolicyKind::UniformRandom, 12);
  std::vector<double> counts(10, 0.0);
  for (const auto& t : b.transitions) {
    const auto bin = static_cast<std::size_t>(std::min(9.0, std::floor((t.a + 1.0) * 5.0)));
    counts[bin] += 1.0;
  }
  const double expected = static_cast<double>(b.size()) / 10.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 21.666);  // chi-square, 9 degrees of freedom, alpha = 0.01
}

TEST_CASE("random-walk actions stay in bounds and move in bounded steps") {
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_swing_up_spec();
  const Batch b = generate_batch(spec, 20000, 500, PolicyKind::RandomWalk, 13);
  const double max_step = kRandomWalkStepFraction * 2.0 * spec.action_max;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto& t = b.transitions[k];
    CHECK(std::abs(t.a) <= spec.action_max);
    if (t.step == 0) {
      CHECK(std::abs(t.a) <= max_step);
    } else {
      CHECK(std::abs(t.a - b.transitions[k - 1].a) <= max_step + 1e-12);
    }
  }
}

TEST_CASE("batch files round trip losslessly") {
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_balance_spec();
  const Batch b = generate_batch(spec, 1000, 100, PolicyKind::RandomWalk, 14);
  const auto path = temp_path("fpsrl_batch_test.jsonl");
  save_batch(b, path);
  const Batch loaded = load_batch(path);
  CHECK(loaded == b);

  // Retraining on the reloaded batch gives the same parameters.
  WorldModelTrainConfig cfg;
  cfg.depths = {1};
  cfg.train.max_updates = 500;
  cfg.seed = 3;
  CHECK(train_world_model(loaded, cfg).deltas == train_world_model(b, cfg).deltas);
  std::filesystem::remove(path);
}

TEST_CASE("malformed batch files name the bad line") {
  const BenchmarkSpec spec = BenchmarkSpec::mountain_car_spec();
  const std::string text = batch_to_jsonl(generate_batch(spec, 20, 200, PolicyKind::UniformRandom, 1));
  const std::string truncated = text.substr(0, text.size() - 25);
  std::size_t lines = 0;
  for (char c : truncated) lines += c == '\n';
  try {
    batch_from_jsonl(truncated, "cut.jsonl");
    FAIL("expected a LoadError");
  } catch (const LoadError& e) {
    CHECK(e.line() == lines + 1);
    CHECK(std::string(e.what()).find("cut.jsonl:") == 0);
  }
  std::string wrong_version = text;
  const auto pos = wrong_version.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  wrong_version.replace(pos, 18, "\"format_version\":9");
  CHECK_THROWS_AS(batch_from_jsonl(wrong_version, "v.jsonl"), LoadError);
  CHECK_THROWS_AS(load_batch(temp_path("fpsrl_does_not_exist.jsonl")), LoadError);
}

TEST_CASE("state files round trip") {
  Rng rng(15);
  const auto states = sample_start_states(BenchmarkSpec::cart_pole_swing_up_spec(), Region::Test, 50, rng);
  const auto path = temp_path("fpsrl_states_test.jsonl");
  save_states(states, path);
  CHECK(load_states(path) == states);
  std::filesystem::remove(path);
}
