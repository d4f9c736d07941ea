#include <doctest.h>

#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "kmono/fourier.hpp"
#include "kmono/learners.hpp"

using namespace kmono;

namespace {

FunctionTable dictator(int d) {
  return FunctionTable::tabulate(Domain::hypercube(d), 2, [](std::uint64_t x) { return static_cast<int>(x & 1); });
}

FunctionTable majority(int d) {
  return FunctionTable::tabulate(Domain::hypercube(d), 2, [d](std::uint64_t x) { return 2 * weight(x) > d ? 1 : 0; });
}

// Base learner that reads the target off the oracle config, for composition tests.
BooleanHypothesis exact_base(const OracleConfig& cfg, double, double) {
  const Domain dom = oracle_domain(cfg);
  return FunctionTable::tabulate(dom, 2, [&](std::uint64_t x) { return evaluate_target(cfg, x); });
}

}  // namespace

TEST_CASE("mask enumeration by degree") {
  const auto masks = masks_up_to_degree(5, 2);
  CHECK(masks.size() == 16);
  CHECK(count_up_to_degree(5, 2) == 16);
  CHECK(masks.front() == 0);
  for (std::size_t i = 1; i < masks.size(); ++i) {
    CHECK(weight(masks[i - 1]) <= weight(masks[i]));
    if (weight(masks[i - 1]) == weight(masks[i])) CHECK(masks[i - 1] < masks[i]);
  }
  CHECK(count_up_to_degree(40, 3) == 1 + 40 + 780 + 9880);
}

TEST_CASE("low-degree sample size") {
  CHECK(low_degree_sample_size(0.1, 0.1, 0.0, 4, 1) == 512);
  CHECK(low_degree_sample_size(0.1, 0.05, 0.0, 4, 1) > 512);
  CHECK(low_degree_sample_size(0.1, 0.1, 0.4, 4, 1) > low_degree_sample_size(0.1, 0.1, 0.2, 4, 1));
  Budget b;
  b.samples = 1000;
  CHECK_THROWS_AS(low_degree_sample_size(0.1, 0.1, 0.49, 4, 1, 1.0, b), BudgetError);
  CHECK(low_degree_sample_size(0.1, 0.1, 0.0, 4, 1, 2.0) == 1024);  // ⌈2·(100 + ln 10)·5⌉
}

TEST_CASE("coefficient count and noiseless dictator") {
  const auto f = dictator(8);
  const auto h = low_degree_learn(uniform_oracle(f, 0.0, 3), 1, 5000);
  CHECK(h.masks.size() == 9);
  CHECK(static_cast<std::size_t>(h.coeffs.size()) == 9);
  CHECK(exact_error(h, f) == 0.0);
}

TEST_CASE("noisy dictator") {
  const auto f = dictator(8);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    good += exact_error(low_degree_learn(uniform_oracle(f, 0.25, seed), 1, 20000), f) <= 0.05;
  CHECK(good >= 18);
}

TEST_CASE("estimation routes agree") {
  const auto f = majority(7);
  const auto cfg = uniform_oracle(f, 0.2, 8);
  const auto a = low_degree_learn(cfg, 3, 3000, EstimationRoute::direct);
  const auto b = low_degree_learn(cfg, 3, 3000, EstimationRoute::transform);
  CHECK(a.sums == b.sums);
  CHECK(a.masks == b.masks);
}

TEST_CASE("ties predict +1") {
  // Two examples with opposite labels at the same point cancel every sum.
  LowDegreeHypothesis h;
  h.d = 2;
  h.tau = 2;
  h.masks = masks_up_to_degree(2, 2);
  h.sums.assign(h.masks.size(), 0);
  h.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.masks.size()));
  h.samples = 2;
  for (Mask x = 0; x < 4; ++x) CHECK(h.predict(x) == 1);
  MajorityTable m(Domain::hypercube(2));
  CHECK(m.predict(3) == 1);
  m.minus[3] = 1;
  CHECK(m.predict(3) == 0);
  m.plus[3] = 1;
  CHECK(m.predict(3) == 1);
}

TEST_CASE("low-degree learner argument checks") {
  const auto f = dictator(3);
  CHECK_THROWS_AS(low_degree_learn(uniform_oracle(f), 1, 0), std::invalid_argument);
  const auto h = low_degree_learn(uniform_oracle(f), 7, 200);
  CHECK(h.tau == 3);
  CHECK(h.masks.size() == 8);
  CHECK_THROWS(low_degree_learn(uniform_oracle(FunctionTable::constant(Domain::hypergrid(2, 3), 2, 0)), 1, 10));
}

TEST_CASE("MAJ3 spectrum is recovered") {
  const auto f = majority(3);
  const auto spec = wht(to_pm1(f));
  const std::size_t s = 200000;
  const auto h = low_degree_learn(uniform_oracle(f, 0.0, 21), 3, s);
  for (std::size_t i = 0; i < h.masks.size(); ++i) {
    const double truth = spec[h.masks[i]];
    const double sigma = std::sqrt((1 - truth * truth) / s);
    CHECK(std::abs(h.coeffs[static_cast<Eigen::Index>(i)] - truth) <= 3 * sigma + 1e-12);
  }
}

TEST_CASE("estimates are unbiased under noise") {
  const auto f = majority(3);
  const auto spec = wht(to_pm1(f));
  const int trials = 2000;
  const std::size_t s = 100;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(8), sq = Eigen::VectorXd::Zero(8);
  std::vector<Mask> masks;
  for (int t = 0; t < trials; ++t) {
    const auto h = low_degree_learn(uniform_oracle(f, 0.25, 1000 + t), 3, s);
    masks = h.masks;
    sum += h.coeffs;
    sq += h.coeffs.cwiseProduct(h.coeffs);
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    const double mean = sum[j] / trials;
    const double var = sq[j] / trials - mean * mean;
    CHECK(std::abs(mean - spec[masks[i]]) <= 3 * std::sqrt(var / trials));
  }
}

TEST_CASE("error does not grow with more samples") {
  const auto f = majority(7);
  std::vector<double> means;
  for (std::size_t s : {50, 200, 800, 3200}) {
    double acc = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed)
      acc += exact_error(low_degree_learn(uniform_oracle(f, 0.1, seed), 2, s), f);
    means.push_back(acc / 30);
  }
  // Each mean error is an average of 30 values in [0, 1]; 3σ ≤ 3·0.5/√30 ≈ 0.27, so allow that much slack.
  for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] <= means[i - 1] + 0.27);
  CHECK(means.back() <= means.front());
}

TEST_CASE("k-monotone cutoff") {
  CHECK(kmono_degree_cutoff(1, 4, 0.5) == 4);
  CHECK(kmono_degree_cutoff(1, 9, 0.34) == 9);
  CHECK(kmono_degree_cutoff(1, 100, 1.0) == 10);
  CHECK(kmono_degree_cutoff(2, 100, 1.0) == 20);
}

TEST_CASE("monotone MAJ9 at the formula sample size") {
  const auto f = majority(9);
  const double eps = 0.34;
  const int tau = kmono_degree_cutoff(1, 9, eps);
  const auto s = low_degree_sample_size(eps, 1.0 / 6.0, 0.0, 9, tau);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    good += exact_error(kmono_learn_hypercube(uniform_oracle(f, 0.0, seed), 1, eps, s), f) <= eps;
  CHECK(good >= 9);
}

TEST_CASE("coupon learner recovers fully seen tables") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = FunctionTable::tabulate(Domain::hypergrid(2, 3), 2, [&](std::uint64_t) { return int(gen() & 1); });
    const auto h = coupon_learn(uniform_oracle(f, 0.0, trial), 400);
    for (std::uint64_t x = 0; x < 9; ++x) {
      REQUIRE(h.seen(x) > 0);
      CHECK(h.seen(x) == h.plus[x] + h.minus[x]);
    }
    CHECK(h.to_table() == f);
  }
}

TEST_CASE("coupon sample size") {
  const auto small = coupon_sample_size(0.5, 0.5, 0.0, 2, 1);
  CHECK(small > 0);
  CHECK(small < 1000);
  // Doubling d squares the N^(2d) factor.
  const double a = coupon_sample_size_log(0.1, 0.1, 0.1, 3, 2), b = coupon_sample_size_log(0.1, 0.1, 0.1, 3, 4);
  CHECK(b - a == doctest::Approx(4 * std::log(3.0)));
  CHECK(coupon_sample_size_log(0.1, 0.1, 0.499, 2, 1) > coupon_sample_size_log(0.1, 0.1, 0.4, 2, 1));
  CHECK_THROWS_AS(coupon_sample_size(0.1, 0.1, 0.1, 10, 10), BudgetError);
}

TEST_CASE("coupon learner under noise at the formula size") {
  std::mt19937_64 gen(9);
  const auto s = coupon_sample_size(1.0 / 32, 0.1, 0.1, 4, 2);
  int exact = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto f = FunctionTable::tabulate(Domain::hypergrid(2, 4), 2, [&](std::uint64_t) { return int(gen() & 1); });
    exact += coupon_learn(uniform_oracle(f, 0.1, trial), s).to_table() == f;
  }
  CHECK(exact >= 9);
}

TEST_CASE("per-point majority error at the vote count") {
  const double eta = 0.1, beta = 0.05;
  const auto m = static_cast<std::size_t>(std::ceil(majority_votes_needed(eta, beta)));
  // Every example lands on point 0 so each learner sees exactly m votes there.
  OracleConfig cfg;
  cfg.distribution = CustomDistribution{[](CounterRng&) { return LabeledExample{0, 1}; }, Domain::hypercube(1)};
  cfg.eta = eta;
  int wrong = 0;
  for (std::uint64_t rep = 0; rep < 10000; ++rep) {
    cfg.seed = rep;
    wrong += coupon_learn(cfg, m).predict(0) != 1;
  }
  CHECK(wrong <= 500);
}

TEST_CASE("threshold composition with r = 2 is one base call") {
  const auto f = dictator(3);
  int calls = 0;
  const auto h = threshold_compose_learn(uniform_oracle(f), [&](const OracleConfig& c, double e, double d) {
    ++calls;
    return exact_base(c, e, d);
  }, 0.1, 0.1);
  CHECK(calls == 1);
  CHECK(exact_error(h, f) == 0.0);
}

TEST_CASE("threshold composition recovers a clamped weight") {
  const auto f = FunctionTable::tabulate(Domain::hypercube(3), 3, [](std::uint64_t x) { return std::min(weight(x), 2); });
  std::vector<double> level_eps;
  const auto h = threshold_compose_learn(uniform_oracle(f), [&](const OracleConfig& c, double e, double d) {
    level_eps.push_back(e);
    return exact_base(c, e, d);
  }, 0.3, 0.3);
  CHECK(exact_error(h, f) == 0.0);
  REQUIRE(level_eps.size() == 2);
  CHECK(level_eps[0] == doctest::Approx(0.1));
  CHECK_THROWS_AS(threshold_compose_learn(uniform_oracle(f, 0.1), exact_base, 0.3, 0.3), UnsupportedNoise);
}

TEST_CASE("composed error is bounded by the sum of level errors") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = FunctionTable::tabulate(Domain::hypercube(4), 4, [&](std::uint64_t) { return int(gen() % 4); });
    // A deliberately sloppy base learner: the exact threshold with random flips.
    const auto h = threshold_compose_learn(uniform_oracle(f, 0.0, trial), [&](const OracleConfig& c, double, double) {
      auto t = std::get<FunctionTable>(exact_base(c, 0, 0));
      return BooleanHypothesis(FunctionTable::tabulate(t.domain(), 2, [&](std::uint64_t x) {
        return gen() % 5 == 0 ? 1 - t[x] : t[x];
      }));
    }, 0.3, 0.3);
    for (std::uint64_t x = 0; x < f.size(); ++x) {
      int wrong_levels = 0;
      for (int t = 1; t < 4; ++t) wrong_levels += predict(h.levels[t - 1], x) != (f[x] >= t ? 1 : 0);
      if (h.predict(x) != f[x]) CHECK(wrong_levels >= 1);
    }
  }
}

TEST_CASE("thresholds of k-monotone tables stay k-monotone, exhaustively on d = 3 with r = 3") {
  for (const auto& f : brute::all_tables(Domain::hypercube(3), 3)) {
    const int k = brute::longest_chain(f);
    for (int t = 1; t < 3; ++t) CHECK(brute::longest_chain(threshold_table(f, t)) <= k);
  }
}
