#include "kmono/testers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kmono/learners.hpp"

namespace kmono {

std::size_t fresh_sample_count(double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(20.0 / (eps * eps)));
}

bool accepts(double alpha, double eps) { return alpha <= 3.0 * eps / 4.0; }

Projector exact_projector(int k, const Budget& budget) {
  return [k, budget](const FunctionTable& h) {
    if (is_k_monotone(h, k, budget)) return h;
    return KMonotoneSet(h.domain(), h.r(), k, budget).nearest(h);
  };
}

TableLearner kmono_table_learner(int k, double delta, double c) {
  return [k, delta, c](const OracleConfig& cfg, double eps) {
    const int d = oracle_domain(cfg).d;
    const int tau = kmono_degree_cutoff(k, d, eps);
    const std::size_t s = low_degree_sample_size(eps, delta, cfg.eta, d, tau, c);
    return LearnedTable{low_degree_learn(cfg, tau, s).to_table(), s};
  };
}

TestVerdict test_by_learning(const OracleConfig& cfg, int k, double eps, const TableLearner& learner,
                             const Projector& projector) {
  validate(cfg);
  if (k < 1) throw std::invalid_argument("test_by_learning: k must be >= 1");
  if (!learner || !projector) throw std::invalid_argument("test_by_learning: learner and projector are required");
  const std::size_t fresh = fresh_sample_count(eps);

  const LearnedTable learned = learner(with_stream(cfg, derive_key(cfg.stream, 1)), eps / 4.0);
  const FunctionTable g = projector(learned.hypothesis);

  const auto examples = draw(with_stream(cfg, derive_key(cfg.stream, 2)), fresh);
  std::size_t mismatches = 0;
  for (const auto& ex : examples) mismatches += g.at(ex.point) != ex.label;

  TestVerdict verdict;
  verdict.alpha = static_cast<double>(mismatches) / static_cast<double>(fresh);
  verdict.decision = accepts(*verdict.alpha, eps) ? Decision::accept : Decision::reject;
  verdict.samples_used = learned.samples + fresh;
  verdict.seed = cfg.seed;
  return verdict;
}

AlternatingChain longest_sample_chain(std::span<const LabeledExample> sample, const Domain& domain) {
  std::vector<LabeledExample> pts(sample.begin(), sample.end());
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.point < b.point; });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.point == b.point; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n == 0) return {};

  // odd/even: longest chain of that parity ending at i (0 = none).
  std::vector<int> odd(n, 1), even(n, 0);
  std::vector<std::ptrdiff_t> prev_odd(n, -1), prev_even(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (!precedes(domain, pts[j].point, pts[i].point)) continue;
      if (pts[i].label < pts[j].label && odd[j] + 1 > even[i]) {
        even[i] = odd[j] + 1;
        prev_even[i] = static_cast<std::ptrdiff_t>(j);
      }
      if (pts[i].label > pts[j].label && even[j] > 0 && even[j] + 1 > odd[i]) {
        odd[i] = even[j] + 1;
        prev_odd[i] = static_cast<std::ptrdiff_t>(j);
      }
    }
  }
  std::size_t end = 0;
  int best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int len = std::max(odd[i], even[i]);
    if (len > best) {
      best = len;
      end = i;
    }
  }
  AlternatingChain chain;
  auto cur = static_cast<std::ptrdiff_t>(end);
  bool is_even = even[end] == best;
  while (cur >= 0) {
    chain.points.push_back(pts[static_cast<std::size_t>(cur)].point);
    chain.values.push_back(pts[static_cast<std::size_t>(cur)].label);
    cur = is_even ? prev_even[static_cast<std::size_t>(cur)] : prev_odd[static_cast<std::size_t>(cur)];
    is_even = !is_even;
  }
  std::reverse(chain.points.begin(), chain.points.end());
  std::reverse(chain.values.begin(), chain.values.end());
  return chain;
}

TestVerdict one_sided_test(std::span<const LabeledExample> sample, const Domain& domain, int k, int r) {
  if (k < 1 || r < 2) throw std::invalid_argument("one_sided_test: need k >= 1 and r >= 2");
  for (const auto& ex : sample)
    if (ex.label < 0 || ex.label >= r || ex.point >= domain.size())
      throw std::invalid_argument("one_sided_test: example outside domain or label range");
  TestVerdict verdict;
  verdict.samples_used = sample.size();
  auto chain = longest_sample_chain(sample, domain);
  if (chain.size() >= static_cast<std::size_t>(k) + 1) {
    chain.points.resize(static_cast<std::size_t>(k) + 1);
    chain.values.resize(static_cast<std::size_t>(k) + 1);
    verdict.decision = Decision::reject;
    verdict.witness = std::move(chain);
  }
  return verdict;
}

Fraction comparable_pair_probability(int d) {
  if (d < 1 || d > 31) throw std::invalid_argument("comparable_pair_probability: d must lie in [1, 31]");
  std::int64_t num = 1, den = 1;
  for (int i = 0; i < d; ++i) {
    num *= 3;
    den *= 4;
  }
  return Fraction(num, den);
}

}  // namespace kmono
