// Acceptance gate. Prints one PASS/FAIL line per criterion, with detail lines
// underneath. Exits 0 only when every criterion passes, or when the set of
// failures equals the list given with --expect-fail (e.g. --expect-fail 7).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brute_force.hpp"
#include "kmono/downsample.hpp"
#include "kmono/fourier.hpp"
#include "kmono/learners.hpp"
#include "kmono/lowerbound.hpp"
#include "kmono/parallel.hpp"
#include "kmono/testers.hpp"

using namespace kmono;

namespace {

struct Report {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
};

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

FunctionTable random_table(const Domain& dom, int r, std::mt19937_64& gen) {
  return FunctionTable::tabulate(dom, r, [&](std::uint64_t) { return static_cast<int>(gen() % r); });
}

// 1 ------------------------------------------------------------------------

Report exactness() {
  Report rep;
  std::size_t tables = 0, mismatches = 0, distance_mismatches = 0, bound_violations = 0;
  auto check_table = [&](const FunctionTable& f, const std::vector<KMonotoneSet>& sets, bool brute_distance) {
    ++tables;
    const int longest = brute::longest_chain(f);
    for (int k = 1; k <= f.d() + 1; ++k) mismatches += is_k_monotone(f, k) != (longest <= k);
    for (int k = 1; k <= 2; ++k) {
      const Fraction exact = sets[k - 1].distance(f);
      if (brute_distance)
        distance_mismatches += exact != Fraction(static_cast<std::int64_t>(brute::distance_count(f, k)),
                                                 static_cast<std::int64_t>(f.size()));
      const auto family = greedy_disjoint_chains(f, 3 * k);
      bound_violations += exact < chain_lower_bound(f, family, k);
    }
  };
  for (int d = 0; d <= 3; ++d) {
    const Domain dom = Domain::hypercube(d);
    const std::vector<KMonotoneSet> sets{KMonotoneSet(dom, 2, 1), KMonotoneSet(dom, 2, 2)};
    for (const auto& f : brute::all_tables(dom, 2)) check_table(f, sets, true);
  }
  const std::size_t small = tables;
  const Domain dom4 = Domain::hypercube(4);
  const std::vector<KMonotoneSet> sets4{KMonotoneSet(dom4, 2, 1), KMonotoneSet(dom4, 2, 2)};
  std::mt19937_64 gen(1);
  for (int i = 0; i < 10000; ++i) check_table(random_table(dom4, 2, gen), sets4, false);
  rep.require(mismatches == 0, fmt("is_k_monotone vs all-chains brute force: %zu mismatches over %zu tables "
                                   "(%zu exhaustive for d <= 3, 10000 random at d = 4)",
                                   mismatches, tables, small));
  rep.require(distance_mismatches == 0,
              fmt("exact distance vs brute force for d <= 3, k in {1,2}: %zu mismatches", distance_mismatches));
  rep.require(bound_violations == 0, fmt("chain_lower_bound <= exact distance: %zu violations", bound_violations));
  return rep;
}

// 2 ------------------------------------------------------------------------

Report fourier() {
  Report rep;
  std::mt19937_64 gen(2);
  double worst = 0;
  for (int d = 1; d <= 16; ++d) {
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      const auto f = random_table(Domain::hypercube(d), 2, gen);
      worst = std::max(worst, std::abs(wht(to_pm1(f)).weight() - 1.0));
    }
  }
  rep.require(worst <= 1e-9, fmt("Parseval on random tables d = 1..16: max |sum - 1| = %.3g", worst));

  std::size_t monotone = 0, checks = 0, violations = 0;
  double worst_margin = -1;
  for (const auto& f : brute::all_tables(Domain::hypercube(4), 2)) {
    if (!brute::is_monotone(f)) continue;
    ++monotone;
    const auto spec = wht(to_pm1(f));
    for (int e = 1; e <= 9; ++e) {
      const double eps = e / 10.0;
      // |S| > sqrt(d)/eps, as a strict inequality over integers.
      const int tau = std::min(4, static_cast<int>(std::floor(std::sqrt(4.0) / eps)));
      const double tail = spectral_tail(spec, tau);
      ++checks;
      violations += tail > eps + 1e-12;
      worst_margin = std::max(worst_margin, tail - eps);
    }
  }
  rep.require(monotone == 168 && violations == 0,
              fmt("tail bound over %zu monotone d = 4 functions x 9 eps: %zu of %zu violated (max tail - eps = %.3f)",
                  monotone, violations, checks, worst_margin));
  return rep;
}

// 3 ------------------------------------------------------------------------

Report noise_corrected() {
  Report rep;
  const int d = 3;
  const auto dict = FunctionTable::tabulate(Domain::hypercube(d), 2, [](std::uint64_t x) { return int(x & 1); });
  const auto maj = FunctionTable::tabulate(Domain::hypercube(d), 2, [](std::uint64_t x) { return int(weight(x) >= 2); });
  const std::size_t trials = 10000, s = 200;
  for (const auto& [name, f] : {std::pair{"dictator", dict}, std::pair{"MAJ3", maj}}) {
    const auto truth = wht(to_pm1(f));
    for (double eta : {0.0, 0.25}) {
      std::vector<Eigen::VectorXd> z(trials);
      std::vector<Mask> masks;
      for (std::uint64_t t = 0; t < trials; ++t) {
        const auto h = low_degree_learn(uniform_oracle(f, eta, 1000 + t), d, s);
        z[t] = h.coeffs;
        if (t == 0) masks = h.masks;
      }
      int outside = 0;
      double worst = 0;
      for (std::size_t j = 0; j < masks.size(); ++j) {
        double mean = 0, sq = 0;
        for (const auto& v : z) mean += v[j];
        mean /= trials;
        for (const auto& v : z) sq += (v[j] - mean) * (v[j] - mean);
        const double se = std::sqrt(sq / (trials - 1) / trials);
        const double dev = std::abs(mean - truth[masks[j]]);
        outside += dev > 3 * se + 1e-12;
        if (se > 0) worst = std::max(worst, dev / se);
      }
      rep.require(outside == 0, fmt("%s eta = %.2f: %d of %zu coefficients outside 3 sigma (max |z| = %.2f)", name,
                                    eta, outside, masks.size(), worst));
    }
  }
  return rep;
}

// 4 ------------------------------------------------------------------------

Report learning() {
  Report rep;
  const auto dict = FunctionTable::tabulate(Domain::hypercube(8), 2, [](std::uint64_t x) { return int(x & 1); });
  int good = 0;
  for (std::uint64_t t = 0; t < 20; ++t)
    good += exact_error(Hypothesis(low_degree_learn(uniform_oracle(dict, 0.25, t), 1, 20000)), dict) <= 0.05;
  rep.require(good >= 18, fmt("low-degree on dictators (d=8, tau=1, eta=0.25, s=20000): %d/20 with error <= 0.05", good));

  const double eps = 1.0 / 32, delta = 0.1, eta = 0.1;
  const auto s = coupon_sample_size(eps, delta, eta, 4, 2);
  std::mt19937_64 gen(4);
  int exact = 0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto f = random_table(Domain::hypergrid(2, 4), 2, gen);
    exact += coupon_learn(uniform_oracle(f, eta, t), s).to_table() == f;
  }
  rep.require(exact >= 9, fmt("coupon learner (N=4, d=2, eta=0.1, s=%llu): %d/10 exact", (unsigned long long)s, exact));

  const BooleanLearner exact_base = [](const OracleConfig& cfg, double, double) -> BooleanHypothesis {
    return FunctionTable::tabulate(oracle_domain(cfg), 2, [&](std::uint64_t x) { return evaluate_target(cfg, x); });
  };
  std::size_t targets = 0, recovered = 0;
  for (const auto& f : brute::all_tables(Domain::hypercube(3), 3)) {
    if (!brute::is_monotone(f)) continue;
    ++targets;
    recovered += exact_error(threshold_compose_learn(uniform_oracle(f), exact_base, 0.3, 0.3), f) == 0.0;
  }
  rep.require(targets > 0 && recovered == targets,
              fmt("threshold composition: %zu/%zu monotone 3-valued d=3 tables recovered exactly", recovered, targets));
  return rep;
}

// 5 ------------------------------------------------------------------------

Report tester() {
  Report rep;
  const double eps = 0.3;
  const int trials = 100;
  const Domain dom = Domain::hypercube(4);
  const auto learner = kmono_table_learner(1);
  const auto project = exact_projector(1);
  auto rate = [&](const FunctionTable& f, bool want_accept) {
    int hits = 0;
    for (int t = 0; t < trials; ++t)
      hits += test_by_learning(uniform_oracle(f, 0.0, 500 + t), 1, eps, learner, project).accepted() == want_accept;
    return hits;
  };
  const std::vector<std::pair<std::string, FunctionTable>> monotone{
      {"x1", FunctionTable::tabulate(dom, 2, [](std::uint64_t x) { return int(x & 1); })},
      {"weight>=2", FunctionTable::tabulate(dom, 2, [](std::uint64_t x) { return int(weight(x) >= 2); })},
      {"x1 and x2", FunctionTable::tabulate(dom, 2, [](std::uint64_t x) { return int((x & 3) == 3); })},
  };
  for (const auto& [name, f] : monotone) {
    const int acc = rate(f, true);
    rep.require(acc * 3 >= trials * 2, fmt("accept rate on monotone %s: %d/%d", name.c_str(), acc, trials));
  }
  std::vector<std::pair<std::string, FunctionTable>> far{
      {"weight<2", FunctionTable::tabulate(dom, 2, [](std::uint64_t x) { return int(weight(x) < 2); })},
      {"not x1", FunctionTable::tabulate(dom, 2, [](std::uint64_t x) { return int(!(x & 1)); })},
  };
  std::mt19937_64 gen(5);
  while (far.size() < 4) {
    auto f = random_table(dom, 2, gen);
    if (exact_distance_to_k_monotone(f, 1).to_double() >= 0.3) far.emplace_back("random", std::move(f));
  }
  for (const auto& [name, f] : far) {
    const double dist = exact_distance_to_k_monotone(f, 1).to_double();
    const int rej = rate(f, false);
    rep.require(dist >= 0.3 && rej * 3 >= trials * 2,
                fmt("reject rate on %s (distance %.3f): %d/%d", name.c_str(), dist, rej, trials));
  }
  return rep;
}

// 6 ------------------------------------------------------------------------

Report one_sided() {
  Report rep;
  std::size_t runs = 0, false_rejections = 0;
  for (int d = 0; d <= 3; ++d) {
    const Domain dom = Domain::hypercube(d);
    for (const auto& f : brute::all_tables(dom, 2)) {
      if (!brute::is_monotone(f)) continue;
      for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << dom.size()); ++subset) {
        std::vector<LabeledExample> sample;
        for (std::uint64_t x = 0; x < dom.size(); ++x)
          if (subset >> x & 1) sample.push_back({x, f[x]});
        ++runs;
        false_rejections += !one_sided_test(sample, dom, 1, 2).accepted();
      }
    }
  }
  rep.require(false_rejections == 0,
              fmt("false rejections over all monotone f, d <= 3, every sample subset: %zu of %zu", false_rejections, runs));

  const std::size_t pairs = 1000000;
  for (int d = 4; d <= 10; ++d) {
    CounterRng rng(600 + d);
    const Mask mask = (Mask{1} << d) - 1;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const Mask x = rng() & mask, y = rng() & mask;
      hits += cube_leq(x, y);
    }
    const double p = comparable_pair_probability(d).to_double(), freq = double(hits) / pairs;
    const double sigma = std::sqrt(p * (1 - p) / pairs);
    rep.require(std::abs(freq - p) <= 3 * sigma,
                fmt("d=%2d: P[x <= y] empirical %.5f vs (3/4)^d %.5f (|z| = %.2f)", d, freq, p, std::abs(freq - p) / sigma));
  }
  return rep;
}

// 7 ------------------------------------------------------------------------

Report talagrand() {
  Report rep;
  const std::vector<std::pair<int, int>> configs{{2, 1}, {2, 2}, {3, 1}};
  for (const auto& [r, k] : configs) {
    const auto p = TalagrandParams::make(12, r, k, 1.0);
    std::vector<char> ok(100);
    std::vector<int> chain(100);
    parallel_for(100, workers(), [&](std::size_t i) {
      const auto inst = TalagrandInstance::sample_yes(p, 7000 + i);
      ok[i] = verify_yes_k_monotone(inst);
      chain[i] = longest_alternating_chain(inst.materialize());
    });
    const int passed = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    rep.require(passed == 100, fmt("(r,k)=(%d,%d) d=12: %d/100 yes-instances are k-monotone (longest chain max %d)", r,
                                   k, passed, *std::max_element(chain.begin(), chain.end())));
  }

  for (const auto& [r, k] : configs) {
    const auto p = TalagrandParams::make(12, r, k, 1.0);
    std::size_t off_u_diffs = 0, on_u_diffs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto yes = TalagrandInstance::sample_yes(p, seed);
      const auto no = yes.with_no_labels(derive_key(seed, 99));
      for (Mask x = 0; x < 4096; ++x) {
        if (yes.eval(x) == no.eval(x)) continue;
        (yes.unique_cell(x) ? on_u_diffs : off_u_diffs) += 1;
      }
    }
    rep.require(off_u_diffs == 0 && on_u_diffs > 0,
                fmt("(r,k)=(%d,%d): yes/no with shared terms differ on %zu points of U and %zu points outside U", r, k,
                    on_u_diffs, off_u_diffs));
  }

  // Single-sample marginals: one fresh instance and one uniform point per
  // trial, tallied by (block, in U, label). Each cell is a two-proportion
  // z-test between the yes and no families.
  for (const auto& [r, k] : configs) {
    const auto p = TalagrandParams::make(12, r, k, 1.0);
    const std::size_t trials = 40000;
    std::map<std::tuple<int, bool, int>, std::size_t> yes_counts, no_counts;
    for (std::uint64_t t = 0; t < trials; ++t) {
      for (bool yes_side : {true, false}) {
        const std::uint64_t seed = derive_key(t, yes_side ? 1 : 2);
        const auto inst = yes_side ? TalagrandInstance::sample_yes(p, seed) : TalagrandInstance::sample_no(p, seed);
        CounterRng rng(seed, 5);
        const Mask x = rng() & 4095;
        const auto block = block_index(x, p);
        const auto key = std::tuple{block ? *block : -1, inst.unique_cell(x).has_value(), inst.eval(x)};
        ++(yes_side ? yes_counts : no_counts)[key];
      }
    }
    std::set<std::tuple<int, bool, int>> cells;
    for (const auto& [c, n] : yes_counts) cells.insert(c);
    for (const auto& [c, n] : no_counts) cells.insert(c);
    double worst = 0;
    for (const auto& c : cells) {
      const double a = double(yes_counts[c]) / trials, b = double(no_counts[c]) / trials;
      const double pooled = (a + b) / 2;
      const double se = std::sqrt(2 * pooled * (1 - pooled) / trials);
      if (se > 0) worst = std::max(worst, std::abs(a - b) / se);
    }
    rep.require(worst <= 3.0, fmt("(r,k)=(%d,%d): single-sample marginals over %zu cells, max |z| = %.2f", r, k,
                                  cells.size(), worst));
  }

  const auto p14 = TalagrandParams::make(14, 2, 1, 1.0);
  std::vector<DistinguishResult> sweep;
  for (std::size_t s : {1, 2, 4, 8, 16, 32})
    sweep.push_back(distinguishing_experiment(p14, birthday_distinguisher, s, 2000, 77, workers()));
  std::ostringstream line;
  bool increasing = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    line << (i ? ", " : "") << "s=" << sweep[i].samples << ": " << fmt("%.4f", sweep[i].advantage);
    if (i) increasing = increasing && sweep[i].advantage > sweep[i - 1].advantage;
  }
  const auto& first = sweep.front();
  rep.require(std::abs(first.advantage) <= 3 * first.stderr_ + 1e-12,
              fmt("birthday distinguisher at s=1, d=14: advantage %.4f (stderr %.4f)", first.advantage, first.stderr_));
  rep.require(increasing, "advantage strictly increasing over the sweep: " + line.str());
  return rep;
}

// 8 ------------------------------------------------------------------------

Report downsample() {
  Report rep;
  const ProductMeasure mu{{ExponentialLaw{1.0}, UniformLaw{0.0, 1.0}}};
  std::size_t cells = 0, broken = 0;
  for (int n : {4, 16, 64}) {
    const auto bm = build_block_map(mu, n, 20000, 80 + n);
    for (std::uint64_t z = 0; z < bm.grid().size(); ++z, ++cells) broken += bm.block_index(bm.blockpoint(z)) != z;
  }
  rep.require(broken == 0, fmt("block(blockpoint(z)) == z: %zu failures over %zu cells (N = 4, 16, 64)", broken, cells));

  std::size_t tables = 0, violations = 0;
  for (const auto& f : brute::all_tables(Domain::hypergrid(2, 4), 2)) {
    ++tables;
    const int grid_chain = longest_alternating_chain(f);
    const int cube_chain = longest_alternating_chain(cube_table(f));
    for (int k = 1; k <= 3; ++k) violations += grid_chain <= k && cube_chain > k;
  }
  rep.require(violations == 0,
              fmt("k-monotonicity kept by the bitmap embedding, all %zu tables on [4]^2, k = 1..3: %zu violations",
                  tables, violations));

  const RealFunction halfspace = [](const Eigen::VectorXd& x) { return int(0.5 * x[0] + x[1] >= 1.0); };
  const double eps = 0.3;
  const int trials = 6;
  int good = 0;
  std::ostringstream errs;
  for (int t = 0; t < trials; ++t) {
    const auto h = algorithm1_learn(mu, halfspace, 1, eps, 0.1, 900 + t);
    const auto err = estimate_error(h, mu, halfspace, 100000, 950 + t);
    good += err.rate <= 3 * eps;
    errs << (t ? ", " : "") << fmt("%.3f", err.rate);
  }
  rep.require(good * 3 >= trials * 2, fmt("R^d learner, halfspace under exp(1) x U[0,1], d=2, eps=0.3: %d/%d trials "
                                          "with error <= 0.9 (errors %s)",
                                          good, trials, errs.str().c_str()));
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string item; std::getline(ss, item, ',');) expected.insert(std::stoi(item));
    }
  }

  const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
      {"exactness", exactness},   {"fourier", fourier}, {"noise-corrected estimation", noise_corrected},
      {"learning", learning},     {"tester", tester},   {"one-sided", one_sided},
      {"talagrand", talagrand},   {"downsample", downsample},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = criteria[i].second();
    } catch (const std::exception& e) {
      rep.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (rep.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << ", "
              << fmt("%.1f", secs) << " s)\n";
    for (const auto& line : rep.details) std::cout << "    " << line << '\n';
    std::cout.flush();
    if (!rep.pass) failed.insert(static_cast<int>(i + 1));
  }
  std::cout << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria passed\n";
  if (!expected.empty()) {
    std::cout << "expected failures:";
    for (int c : expected) std::cout << ' ' << c;
    std::cout << (failed == expected ? " (matches)\n" : " (does not match)\n");
    return failed == expected ? 0 : 1;
  }
  return failed.empty() ? 0 : 1;
}
