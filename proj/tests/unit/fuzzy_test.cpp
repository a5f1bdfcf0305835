#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "fpsrl/fuzzy.hpp"
#include "fpsrl/text_format.hpp"

using namespace fpsrl;

namespace {

FuzzyPolicyParams random_params(Rng& rng, std::size_t d, std::size_t c) {
  FuzzyPolicyParams p;
  p.scale = rng.uniform(0.5, 30.0);
  p.slope = rng.uniform(0.01, 10.0);
  for (std::size_t i = 0; i < c; ++i) {
    FuzzyRule r;
    for (std::size_t j = 0; j < d; ++j) {
      r.centers.push_back(rng.uniform(-3, 3));
      r.widths.push_back(rng.uniform(kSigmaMin, 3));
    }
    r.output = rng.uniform(-5, 5);
    p.rules.push_back(r);
  }
  return p;
}

FuzzyPolicyParams mc_policy() {
  FuzzyPolicyParams p;
  p.scale = 1.0;
  p.slope = 4.0;
  p.rules = {FuzzyRule{{-0.9, -0.6}, {0.4, 0.8}, -2.0}, FuzzyRule{{-0.3, 0.7}, {0.5, 1.1}, 3.0}};
  return p;
}

}  // namespace

TEST_CASE("membership examples") {
  const FuzzyRule r1{{0.0}, {1.0}, 0.0};
  CHECK(membership(r1, State{0.0}) == 1.0);
  CHECK(membership(r1, State{1.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  const FuzzyRule r2{{1.0, -1.0}, {0.5, 2.0}, 0.0};
  CHECK(membership(r2, State{1.5, 1.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(membership(r2, State{1.0}), ContractViolation);
}

TEST_CASE("policy output examples") {
  FuzzyPolicyParams one{{FuzzyRule{{0.3, 0.1}, {1.0, 1.0}, 0.7}}, 1.5, 1.0};
  CHECK(policy_output(one, State{-4.0, 9.0}) == doctest::Approx(std::tanh(1.5 * 0.7)));

  FuzzyPolicyParams two{{FuzzyRule{{-1.0}, {1.0}, 2.0}, FuzzyRule{{1.0}, {1.0}, -0.5}}, 0.8, 1.0};
  CHECK(policy_output(two, State{0.0}) == doctest::Approx(std::tanh(0.8 * 0.75)));

  FuzzyPolicyParams steep = two;
  steep.slope = 1e3;
  steep.scale = 10.0;
  CHECK(policy_output(steep, State{-0.5}) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("encoded sizes") {
  CHECK(encoded_size(2, 2) == 11);
  CHECK(encoded_size(4, 2) == 19);
  const SymmetrySpec sym{true, 4};
  CHECK(policy_search_box(BenchmarkSpec::cart_pole_swing_up_spec(), sym).lower.size() == 19);
  CHECK(policy_search_box(BenchmarkSpec::mountain_car_spec(), SymmetrySpec{false, 2}).upper.size() ==
        11);
}

TEST_CASE("decode clamps widths and checks the length") {
  std::vector<double> x{0.1, 0.2, -0.5, 0.0, 1.0, 2.0};
  const FuzzyPolicyParams p = decode(x, 2, 1, 3.0);
  CHECK(p.rules[0].widths[0] == 0.5);
  CHECK(p.rules[0].widths[1] == kSigmaMin);
  CHECK(p.rules[0].output == 1.0);
  CHECK(p.slope == 2.0);
  CHECK(p.scale == 3.0);
  x.pop_back();
  CHECK_THROWS_AS(decode(x, 2, 1, 3.0), ContractViolation);
}

TEST_CASE("symmetric expansion") {
  const std::vector<double> half{0.1, 0.0, 0.5, 0.0, 0.2, 0.3, 0.4, 0.5, 2.0, 1.25};
  const FuzzyPolicyParams p = expand_symmetric(half, 4, 2, 30.0);
  REQUIRE(p.rules.size() == 2);
  CHECK(p.rules[1].centers == std::vector<double>{-0.1, -0.0, -0.5, -0.0});
  CHECK(p.rules[1].widths == p.rules[0].widths);
  CHECK(p.rules[1].output == -2.0);
  CHECK(p.slope == 1.25);
  CHECK_THROWS_AS(expand_symmetric(half, 4, 3, 30.0), ConfigError);
}

TEST_CASE("membership is in (0, 1] and equals 1 only at the center") {
  Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    const FuzzyRule r = random_params(rng, 4, 1).rules[0];
    State s{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double m = membership(r, s);
    CHECK(m <= 1.0);
    CHECK(m >= 0.0);
    if (m == 0.0) {
      // Underflow is allowed only far from the center.
      double z2 = 0.0;
      for (std::size_t j = 0; j < 4; ++j)
        z2 += std::pow((s[j] - r.centers[j]) / r.widths[j], 2);
      CHECK(z2 > 1400.0);
    }
    CHECK(m < 1.0);
    CHECK(membership(r, State(std::span<const double>(r.centers))) == 1.0);
  }
}

TEST_CASE("policy output stays strictly inside the action scale") {
  Rng rng(22);
  for (int i = 0; i < 10000; ++i) {
    FuzzyPolicyParams p = random_params(rng, 2, 3);
    p.slope = rng.uniform(0.0, 0.5);
    const State s{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CHECK(std::abs(policy_output(p, s)) < p.scale);
  }
  // Far from every center the weighted mean is still defined.
  FuzzyPolicyParams p = mc_policy();
  CHECK(std::isfinite(policy_output(p, State{1e6, -1e6})));
}

TEST_CASE("shift covariance") {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    FuzzyPolicyParams p = random_params(rng, 2, 3);
    const State s{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double t0 = rng.uniform(-1, 1), t1 = rng.uniform(-1, 1);
    FuzzyPolicyParams q = p;
    for (auto& r : q.rules) {
      r.centers[0] += t0;
      r.centers[1] += t1;
    }
    CHECK(policy_output(q, State{s[0] + t0, s[1] + t1}) ==
          doctest::Approx(policy_output(p, s)).epsilon(1e-9));
  }
}

TEST_CASE("symmetric policies are odd") {
  Rng rng(24);
  const BenchmarkSpec spec = BenchmarkSpec::cart_pole_swing_up_spec();
  const SymmetrySpec sym{true, 4};
  const SearchBox box = policy_search_box(spec, sym);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> x(box.lower.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(box.lower[k], box.upper[k]);
    const FuzzyPolicyParams p = decode_policy(x, 4, sym, spec.action_max);
    const State s{rng.uniform(-kPi, kPi), rng.uniform(-5, 5), rng.uniform(-2, 2),
                  rng.uniform(-3, 3)};
    const State m{-s[0], -s[1], -s[2], -s[3]};
    CHECK(std::abs(policy_output(p, s) + policy_output(p, m)) <= 1e-12);
  }
}

TEST_CASE("encode/decode round trip") {
  Rng rng(25);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t c = 1 + rng.below(4);
    const FuzzyPolicyParams p = random_params(rng, d, c);
    const auto x = encode(p);
    CHECK(x.size() == encoded_size(d, c));
    CHECK(decode(x, d, c, p.scale) == p);
  }
}

TEST_CASE("policy files round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "fpsrl_policy_test.jsonl").string();
  PolicyFile f{BenchmarkId::MountainCar, false, mc_policy()};
  f.params.rules[0].centers[0] = 0.1 + 0.2;  // not exactly representable in short decimal
  save_policy(f, path);
  const PolicyFile g = load_policy(path);
  CHECK(g.benchmark == f.benchmark);
  CHECK(g.symmetric == f.symmetric);
  CHECK(g.params == f.params);

  text::write_file(path, "{\"format\":\"fpsrl-policy\"}\nnot json\n");
  CHECK_THROWS_AS(load_policy(path), LoadError);
  std::filesystem::remove(path);
}

TEST_CASE("rendering") {
  const BenchmarkSpec spec = BenchmarkSpec::mountain_car_spec();
  SUBCASE("one rule gives one block") {
    FuzzyPolicyParams p{{FuzzyRule{{-0.5, 0.0}, {0.3, 0.5}, 1.0}}, 1.0, 1.0};
    const Rendering r = render_rules(p, spec.labels, spec.operating_range, {State{-0.5, 0.0}});
    CHECK(r.text.find("Rule 1") != std::string::npos);
    CHECK(r.text.find("Rule 2") == std::string::npos);
    CHECK(r.text.find("m1 = 1.0000") != std::string::npos);
    CHECK(r.svg.rfind("<svg", 0) == 0);
  }
  SUBCASE("golden text") {
    const Rendering r = render_rules(mc_policy(), spec.labels, spec.operating_range,
                                     {State{-1.0, -1.0}, State{-0.5, 0.5}, State{0.3, 1.5}});
    const std::string golden = text::read_file(FPSRL_GOLDEN_DIR "/render_mc.txt");
    CHECK(r.text == golden);
  }
  CHECK_THROWS_AS(render_rules(mc_policy(), {"x"}, spec.operating_range, {}), ContractViolation);
}
