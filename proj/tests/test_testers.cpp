#include <doctest.h>

#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "kmono/testers.hpp"

using namespace kmono;

namespace {

// Learner that returns the target itself; isolates the projection and estimation steps.
LearnedTable exact_learner(const OracleConfig& cfg, double) {
  const Domain dom = oracle_domain(cfg);
  return {FunctionTable::tabulate(dom, label_range(cfg), [&](std::uint64_t x) { return evaluate_target(cfg, x); }), 0};
}

std::vector<LabeledExample> label(const FunctionTable& f, const std::vector<std::uint64_t>& points) {
  std::vector<LabeledExample> out;
  for (auto x : points) out.push_back({x, f[x]});
  return out;
}

}  // namespace

TEST_CASE("literal constants") {
  CHECK(fresh_sample_count(0.3) == 223);
  CHECK(fresh_sample_count(0.5) == 80);
  CHECK(accepts(0.375, 0.5));
  CHECK_FALSE(accepts(std::nextafter(0.375, 1.0), 0.5));
  CHECK(accepts(0.0, 0.1));
  CHECK_THROWS_AS(fresh_sample_count(0.0), std::invalid_argument);
}

TEST_CASE("comparable pair probability") {
  CHECK(comparable_pair_probability(1) == Fraction(3, 4));
  CHECK(comparable_pair_probability(2) == Fraction(9, 16));
  CHECK(comparable_pair_probability(10) == Fraction(59049, 1048576));
}

TEST_CASE("empirical comparable-pair frequency at d = 6") {
  const int d = 6;
  const std::size_t pairs = 1000000;
  CounterRng rng(42);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Mask x = rng() & 63, y = rng() & 63;
    hits += cube_leq(x, y);
  }
  const double p = comparable_pair_probability(d).to_double();
  CHECK(std::abs(static_cast<double>(hits) / pairs - p) <= 3 * std::sqrt(p * (1 - p) / pairs));
}

TEST_CASE("two-sided tester accepts a monotone target with exact learning") {
  const auto f = FunctionTable::tabulate(Domain::hypercube(4), 2, [](std::uint64_t x) { return weight(x) >= 2; });
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = test_by_learning(uniform_oracle(f, 0.0, seed), 1, 0.4, exact_learner, exact_projector(1));
    CHECK(v.accepted());
    CHECK(*v.alpha == 0.0);
    CHECK(v.samples_used == fresh_sample_count(0.4));
    CHECK_FALSE(v.witness);
  }
}

TEST_CASE("projector returns a nearest k-monotone table") {
  std::mt19937_64 gen(4);
  const auto project = exact_projector(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto h = FunctionTable::tabulate(Domain::hypercube(3), 2, [&](std::uint64_t) { return int(gen() & 1); });
    const auto g = project(h);
    CHECK(brute::is_monotone(g));
    CHECK(hamming_distance(h, g) ==
          Fraction(static_cast<std::int64_t>(brute::distance_count(h, 1)), static_cast<std::int64_t>(h.size())));
  }
  const auto anti = FunctionTable::tabulate(Domain::hypercube(5), 2, [](std::uint64_t x) { return x == 0 ? 1 : 0; });
  CHECK_THROWS_AS(project(anti), BudgetError);
}

TEST_CASE("two-sided tester with the Fourier learner") {
  const double eps = 0.3;
  const auto learner = kmono_table_learner(1);
  const auto monotone = FunctionTable::tabulate(Domain::hypercube(4), 2, [](std::uint64_t x) { return weight(x) >= 2; });
  // Complement of the weight threshold: distance to monotone is well above eps.
  const auto far = FunctionTable::tabulate(Domain::hypercube(4), 2, [](std::uint64_t x) { return weight(x) < 2; });
  REQUIRE(exact_distance_to_k_monotone(far, 1).to_double() >= 0.3);
  int accepted = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    accepted += test_by_learning(uniform_oracle(monotone, 0.0, seed), 1, eps, learner, exact_projector(1)).accepted();
    rejected += !test_by_learning(uniform_oracle(far, 0.0, seed), 1, eps, learner, exact_projector(1)).accepted();
  }
  CHECK(accepted >= 20);
  CHECK(rejected >= 20);
}

TEST_CASE("one-sided tester examples") {
  const auto f = FunctionTable(Domain::hypercube(1), 2, {1, 0});
  const auto v = one_sided_test(label(f, {0, 1}), f.domain(), 1, 2);
  CHECK_FALSE(v.accepted());
  REQUIRE(v.witness);
  CHECK(v.witness->points == std::vector<std::uint64_t>{0, 1});
  CHECK(chain_violation(f, *v.witness).empty());

  // {01, 10} is an anti-chain on d = 2: any labels are consistent with a monotone function.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(one_sided_test(std::vector<LabeledExample>{{1, a}, {2, b}}, Domain::hypercube(2), 1, 2).accepted());
  CHECK(one_sided_test(std::vector<LabeledExample>{}, Domain::hypercube(2), 1, 2).accepted());
  CHECK_THROWS_AS(one_sided_test(std::vector<LabeledExample>{{4, 0}}, Domain::hypercube(2), 1, 2),
                  std::invalid_argument);
}

TEST_CASE("one-sided tester never rejects a monotone function, exhaustively for d <= 3") {
  for (int d = 1; d <= 3; ++d) {
    const Domain dom = Domain::hypercube(d);
    for (const auto& f : brute::all_tables(dom, 2)) {
      if (!brute::is_monotone(f)) continue;
      for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << dom.size()); ++subset) {
        std::vector<std::uint64_t> pts;
        for (std::uint64_t x = 0; x < dom.size(); ++x)
          if (subset >> x & 1) pts.push_back(x);
        CHECK(one_sided_test(label(f, pts), dom, 1, 2).accepted());
      }
    }
  }
}

TEST_CASE("one-sided witnesses match the sample's longest chain") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + trial % 3, r = 2 + trial % 2, k = 1 + trial % 3;
    const Domain dom = Domain::hypercube(d);
    const auto f = FunctionTable::tabulate(dom, r, [&](std::uint64_t) { return int(gen() % r); });
    std::vector<std::uint64_t> pts;
    for (std::uint64_t x = 0; x < dom.size(); ++x)
      if (gen() & 1) pts.push_back(x);
    const auto v = one_sided_test(label(f, pts), dom, k, r);
    if (!v.accepted()) {
      REQUIRE(v.witness);
      CHECK(v.witness->size() == static_cast<std::size_t>(k + 1));
      CHECK(chain_violation(f, *v.witness).empty());
    }
    // With every point sampled the verdict is exactly the k-monotonicity of f.
    std::vector<std::uint64_t> all(dom.size());
    for (std::uint64_t x = 0; x < dom.size(); ++x) all[x] = x;
    CHECK(one_sided_test(label(f, all), dom, k, r).accepted() == brute::is_k_monotone(f, k));
  }
}

TEST_CASE("one-sided soundness on monotone functions under random samples") {
  const auto f = FunctionTable::tabulate(Domain::hypercube(8), 3, [](std::uint64_t x) { return std::min(weight(x) / 3, 2); });
  for (std::uint64_t trial = 0; trial < 2000; ++trial) {
    OracleConfig cfg;
    cfg.target = f;
    cfg.distribution = UniformCube{8};
    cfg.seed = trial;
    const auto sample = draw(cfg, 30);
    CHECK(one_sided_test(sample, f.domain(), 1, 3).accepted());
  }
}

TEST_CASE("two samples rarely reject") {
  // Rejection needs two distinct comparable points. P[x ⪯ y or y ⪯ x] = 2(3/4)^d − 2^-d.
  for (int d = 4; d <= 10; ++d) {
    const auto f = FunctionTable::tabulate(Domain::hypercube(d), 2, [](std::uint64_t x) { return 1 - (weight(x) & 1); });
    const std::size_t trials = 20000;
    std::size_t rejected = 0;
    for (std::uint64_t t = 0; t < trials; ++t)
      rejected += !one_sided_test(draw(uniform_oracle(f, 0.0, t), 2), f.domain(), 1, 2).accepted();
    const double bound = 2 * std::pow(0.75, d) - std::pow(0.5, d);
    CHECK(static_cast<double>(rejected) / trials <= bound + 3 * std::sqrt(bound * (1 - bound) / trials));
  }
}
