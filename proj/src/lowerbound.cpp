#include "kmono/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "kmono/parallel.hpp"

namespace kmono {

namespace {

// Streams under an instance seed.
constexpr std::uint64_t kTermStream = 0;
constexpr std::uint64_t kPhiStream = 1;
constexpr std::uint64_t kNoStream = 2;

// Largest Σ N_i we are willing to hold in memory.
constexpr double kMaxTotalTerms = 16777216.0;

void fail(const std::string& what) { throw std::invalid_argument("TalagrandParams: " + what); }

std::vector<double> weight_law(int d, int lo, int hi) {
  std::vector<double> w;
  double total = 0;
  for (int l = lo; l < hi; ++l) {
    const double lw = std::lgamma(d + 1.0) - std::lgamma(l + 1.0) - std::lgamma(d - l + 1.0);
    w.push_back(std::exp(lw));
    total += w.back();
  }
  for (double& v : w) v /= total;
  return w;
}

// Uniform point of Hamming weight l.
Mask uniform_of_weight(int d, int l, CounterRng& rng) {
  Mask x = 0;
  // Floyd's sampling of an l-subset of [d].
  for (int j = d - l; j < d; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    const Mask bit = Mask{1} << t;
    x |= (x & bit) ? (Mask{1} << j) : bit;
  }
  return x;
}

}  // namespace

TalagrandParams TalagrandParams::make(int d, int r, int k, double eps, const Overrides& overrides) {
  if (d < 2 || d > 63) fail("d must lie in [2, 63]");
  if (r < 2 || r > 256) fail("r must lie in [2, 256]");
  if (k < 1) fail("k must be >= 1");
  if (!(eps > 0 && eps <= 1)) fail("eps must lie in (0, 1]");

  TalagrandParams p;
  p.d = d;
  p.r = r;
  p.k = k;
  p.eps = eps;
  const int blocks = k * (r - 1);

  if (overrides.width) {
    p.width = *overrides.width;
  } else {
    const double w = (r - 1) * k * std::sqrt(static_cast<double>(d)) / (2 * eps);
    if (w > 1e6) fail("default width overflows");
    p.width = std::max(1, static_cast<int>(std::ceil(w - 1e-9)));
  }
  if (p.width < 1) fail("width must be >= 1");

  if (overrides.block_bounds) {
    p.block_bounds = *overrides.block_bounds;
  } else {
    const int begin = (d + 1) / 2;
    const int end = std::min(d + 1, static_cast<int>(std::ceil(d / 2.0 + eps * std::sqrt(static_cast<double>(d)) - 1e-9)));
    const int span = end - begin;
    if (span < blocks)
      fail("window [" + std::to_string(begin) + ", " + std::to_string(end) + ") holds fewer than k(r-1) = " +
           std::to_string(blocks) + " weights; raise eps or d");
    const int size = span / blocks;
    for (int i = 0; i < blocks; ++i) p.block_bounds.push_back(begin + i * size);
    p.block_bounds.push_back(end);
  }

  if (overrides.terms_per_block) {
    p.terms_per_block = *overrides.terms_per_block;
  } else {
    // 2^w e^{-i} in logs; refuse anything that cannot be stored.
    for (int i = 0; i < blocks; ++i) {
      const double log_n = p.width * std::log(2.0) - i;
      if (log_n > std::log(kMaxTotalTerms))
        throw BudgetError("TalagrandParams: 2^w e^-i terms for w = " + std::to_string(p.width) + " exceeds 2^24",
                          "terms");
      p.terms_per_block.push_back(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(std::exp(log_n)))));
    }
  }
  validate(p);
  return p;
}

void validate(const TalagrandParams& p) {
  if (p.d < 2 || p.d > 63) fail("d must lie in [2, 63]");
  if (p.r < 2 || p.r > 256 || p.k < 1) fail("need r in [2, 256] and k >= 1");
  if (p.width < 1) fail("width must be >= 1");
  const auto blocks = static_cast<std::size_t>(p.k) * static_cast<std::size_t>(p.r - 1);
  if (p.terms_per_block.size() != blocks) fail("need k(r-1) term counts");
  if (p.block_bounds.size() != blocks + 1) fail("need k(r-1)+1 block bounds");
  for (std::size_t i = 0; i < blocks; ++i)
    if (p.block_bounds[i] >= p.block_bounds[i + 1]) fail("block bounds must be strictly increasing");
  if (p.block_bounds.front() < 0 || p.block_bounds.back() > p.d + 1) fail("block bounds outside [0, d+1]");
  double total = 0;
  for (auto n : p.terms_per_block) {
    if (n < 1) fail("every block needs at least one term");
    total += static_cast<double>(n);
  }
  if (total > kMaxTotalTerms) throw BudgetError("TalagrandParams: more than 2^24 terms in total", "terms");
}

std::optional<int> block_index(Mask x, const TalagrandParams& params) {
  const int wt = weight(x);
  const auto& b = params.block_bounds;
  if (wt < b.front() || wt >= b.back()) return std::nullopt;
  const auto it = std::upper_bound(b.begin(), b.end(), wt);
  return static_cast<int>(it - b.begin()) - 1;
}

Mask sample_term(int d, int w, CounterRng& rng) {
  if (w < 1 || d < 1 || d > 64) throw std::invalid_argument("sample_term: need w >= 1 and d in [1, 64]");
  Mask t = 0;
  for (int i = 0; i < w; ++i) t |= Mask{1} << rng.below(static_cast<std::uint64_t>(d));
  return t;
}

TermSet sample_terms(const TalagrandParams& params, CounterRng& rng) {
  TermSet set;
  set.terms.resize(params.terms_per_block.size());
  for (std::size_t i = 0; i < set.terms.size(); ++i) {
    set.terms[i].resize(params.terms_per_block[i]);
    for (auto& t : set.terms[i]) t = sample_term(params.d, params.width, rng);
  }
  return set;
}

TalagrandInstance::TalagrandInstance(TalagrandParams params, TermSet terms, Labels labels)
    : params_(std::move(params)), terms_(std::move(terms)), labels_(std::move(labels)) {
  validate(params_);
  if (terms_.terms.size() != params_.terms_per_block.size())
    throw std::invalid_argument("TalagrandInstance: term blocks do not match params");
  for (std::size_t i = 0; i < terms_.terms.size(); ++i) {
    if (terms_.terms[i].size() != params_.terms_per_block[i])
      throw std::invalid_argument("TalagrandInstance: block " + std::to_string(i) + " has the wrong term count");
    for (Mask t : terms_.terms[i])
      if (weight(t) > params_.width || (params_.d < 64 && (t >> params_.d)))
        throw std::invalid_argument("TalagrandInstance: term outside {0,1}^d or wider than w");
  }
  if (const auto* yes = std::get_if<YesLabels>(&labels_)) {
    if (yes->phi.size() != terms_.terms.size()) throw std::invalid_argument("TalagrandInstance: phi blocks mismatch");
    for (std::size_t i = 0; i < yes->phi.size(); ++i) {
      if (yes->phi[i].size() != terms_.terms[i].size())
        throw std::invalid_argument("TalagrandInstance: phi size mismatch in block " + std::to_string(i));
      const int lo = params_.low_value(static_cast<int>(i));
      for (int v : yes->phi[i])
        if (v != lo && v != lo + 1)
          throw std::invalid_argument("TalagrandInstance: phi value outside {i mod (r-1), i mod (r-1) + 1}");
    }
  }
}

TalagrandInstance TalagrandInstance::sample_yes(const TalagrandParams& params, std::uint64_t seed) {
  validate(params);
  CounterRng rng(seed, kTermStream);
  TermSet terms = sample_terms(params, rng);
  return TalagrandInstance(params, std::move(terms), NoLabels{}).with_yes_labels(seed);
}

TalagrandInstance TalagrandInstance::sample_no(const TalagrandParams& params, std::uint64_t seed) {
  validate(params);
  CounterRng rng(seed, kTermStream);
  TermSet terms = sample_terms(params, rng);
  return TalagrandInstance(params, std::move(terms), NoLabels{derive_key(seed, kNoStream)});
}

TalagrandInstance TalagrandInstance::with_yes_labels(std::uint64_t seed) const {
  CounterRng rng(seed, kPhiStream);
  YesLabels yes;
  yes.phi.resize(terms_.terms.size());
  for (std::size_t i = 0; i < yes.phi.size(); ++i) {
    const int lo = params_.low_value(static_cast<int>(i));
    yes.phi[i].resize(terms_.terms[i].size());
    for (auto& v : yes.phi[i]) v = static_cast<std::uint8_t>(lo + static_cast<int>(rng() & 1));
  }
  return TalagrandInstance(params_, terms_, std::move(yes));
}

TalagrandInstance TalagrandInstance::with_no_labels(std::uint64_t key) const {
  return TalagrandInstance(params_, terms_, NoLabels{key});
}

std::optional<std::pair<int, std::size_t>> TalagrandInstance::unique_cell(Mask x) const {
  const auto block = block_index(x, params_);
  if (!block) return std::nullopt;
  const auto& terms = terms_.terms[static_cast<std::size_t>(*block)];
  std::optional<std::size_t> hit;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (!cube_leq(terms[j], x)) continue;
    if (hit) return std::nullopt;
    hit = j;
  }
  if (!hit) return std::nullopt;
  return std::pair{*block, *hit};
}

std::optional<std::size_t> TalagrandInstance::unique_satisfier(Mask x) const {
  if (auto cell = unique_cell(x)) return cell->second;
  return std::nullopt;
}

int TalagrandInstance::eval(Mask x) const {
  const int wt = weight(x);
  if (wt < params_.window_begin()) return 0;
  if (wt >= params_.window_end()) return params_.r - 1;
  const int i = *block_index(x, params_);
  const int lo = params_.low_value(i);
  const auto& terms = terms_.terms[static_cast<std::size_t>(i)];
  std::size_t hits = 0, j = 0;
  for (std::size_t t = 0; t < terms.size() && hits < 2; ++t) {
    if (cube_leq(terms[t], x)) {
      if (hits == 0) j = t;
      ++hits;
    }
  }
  if (hits == 0) return lo;
  if (hits >= 2) return lo + 1;
  if (const auto* yes = std::get_if<YesLabels>(&labels_)) return yes->phi[static_cast<std::size_t>(i)][j];
  return lo + static_cast<int>(prf(std::get<NoLabels>(labels_).key, static_cast<std::uint64_t>(i), x) & 1);
}

FunctionTable TalagrandInstance::materialize(const Budget& budget) const {
  if (params_.d > budget.max_chain_dim || params_.d > kMaxCubeDim)
    throw BudgetError("materialize: d = " + std::to_string(params_.d) + " exceeds the table limit", "max_chain_dim");
  return FunctionTable::tabulate(Domain::hypercube(params_.d), params_.r, [&](std::uint64_t x) { return eval(x); });
}

bool verify_yes_k_monotone(const TalagrandInstance& instance, const Budget& budget) {
  if (!instance.is_yes()) throw std::invalid_argument("verify_yes_k_monotone: instance is a no-variant");
  return is_k_monotone(instance.materialize(budget), instance.params().k, budget);
}

UniqueProbEstimate estimate_unique_prob(const TalagrandParams& params, int block, std::size_t trials,
                                        std::uint64_t seed, const TermSampler& sampler) {
  validate(params);
  if (block < 0 || block >= params.blocks()) throw std::invalid_argument("estimate_unique_prob: no such block");
  if (trials < 1) throw std::invalid_argument("estimate_unique_prob: trials must be >= 1");
  const auto b = static_cast<std::size_t>(block);
  const int lo = params.block_bounds[b], hi = params.block_bounds[b + 1];
  const auto law = weight_law(params.d, lo, hi);
  const std::uint64_t n = params.terms_per_block[b];

  std::size_t first = 0, any = 0;
  std::vector<Mask> terms(n);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, t);
    for (auto& term : terms) term = sampler ? sampler(rng) : sample_term(params.d, params.width, rng);
    double u = rng.uniform01();
    int l = lo;
    for (std::size_t q = 0; q + 1 < law.size() && u >= law[q]; ++q, ++l) u -= law[q];
    const Mask x = uniform_of_weight(params.d, l, rng);
    std::size_t hits = 0, j = 0;
    for (std::size_t q = 0; q < terms.size() && hits < 2; ++q)
      if (cube_leq(terms[q], x)) {
        if (hits == 0) j = q;
        ++hits;
      }
    if (hits == 1) {
      ++any;
      first += j == 0;
    }
  }
  UniqueProbEstimate e;
  e.block = block;
  e.terms = n;
  e.trials = trials;
  const double T = static_cast<double>(trials);
  e.per_term = static_cast<double>(first) / T;
  e.per_term_stderr = std::sqrt(e.per_term * (1 - e.per_term) / T);
  e.any = static_cast<double>(any) / T;
  e.any_stderr = std::sqrt(e.any * (1 - e.any) / T);
  e.lower_band = 1.0 / (20.0 * static_cast<double>(n));
  e.upper_band = 3.0 / static_cast<double>(n);
  e.per_term_in_band = e.per_term >= e.lower_band && e.per_term <= e.upper_band;
  e.any_above_twentieth = e.any >= 1.0 / 20.0;
  return e;
}

std::pair<double, double> unique_prob_exact(const TalagrandParams& params, int block) {
  validate(params);
  if (block < 0 || block >= params.blocks()) throw std::invalid_argument("unique_prob_exact: no such block");
  const auto b = static_cast<std::size_t>(block);
  const int lo = params.block_bounds[b], hi = params.block_bounds[b + 1];
  const auto law = weight_law(params.d, lo, hi);
  const auto n = static_cast<double>(params.terms_per_block[b]);
  double per_term = 0;
  for (int l = lo; l < hi; ++l) {
    // A term (w uniform coordinates) lies below x iff every draw hits x's support.
    const double p = std::pow(static_cast<double>(l) / params.d, params.width);
    per_term += law[static_cast<std::size_t>(l - lo)] * p * std::pow(1 - p, n - 1);
  }
  return {per_term, n * per_term};
}

bool birthday_distinguisher(const TalagrandInstance& instance, std::span<const LabeledExample> sample) {
  std::map<std::pair<int, std::size_t>, int> first_label;
  for (const auto& ex : sample) {
    const auto cell = instance.unique_cell(ex.point);
    if (!cell) continue;
    const auto [it, inserted] = first_label.emplace(*cell, ex.label);
    if (!inserted && it->second != ex.label) return false;
  }
  return true;
}

bool always_accept(const TalagrandInstance&, std::span<const LabeledExample>) { return true; }

DistinguishResult distinguishing_experiment(const TalagrandParams& params, const SampleTester& tester,
                                            std::size_t s, std::size_t trials, std::uint64_t seed,
                                            unsigned workers) {
  validate(params);
  if (!tester) throw std::invalid_argument("distinguishing_experiment: tester is required");
  if (trials < 1) throw std::invalid_argument("distinguishing_experiment: trials must be >= 1");
  std::vector<std::uint8_t> yes_ok(trials), no_ok(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const std::uint64_t trial_key = derive_key(seed, t);
    const auto yes = TalagrandInstance::sample_yes(params, derive_key(trial_key, 0));
    const auto no = TalagrandInstance::sample_no(params, derive_key(trial_key, 1));
    auto run = [&](const TalagrandInstance& f, std::uint64_t stream) {
      CounterRng rng(trial_key, stream);
      std::vector<LabeledExample> sample(s);
      for (auto& ex : sample) {
        ex.point = params.d == 64 ? rng() : rng() & ((Mask{1} << params.d) - 1);
        ex.label = f.eval(ex.point);
      }
      return tester(f, sample);
    };
    yes_ok[t] = run(yes, 2);
    no_ok[t] = run(no, 3);
  });
  DistinguishResult res;
  res.samples = s;
  res.trials = trials;
  const double T = static_cast<double>(trials);
  res.yes_accept = static_cast<double>(std::accumulate(yes_ok.begin(), yes_ok.end(), std::size_t{0})) / T;
  res.no_accept = static_cast<double>(std::accumulate(no_ok.begin(), no_ok.end(), std::size_t{0})) / T;
  res.advantage = res.yes_accept - res.no_accept;
  res.stderr_ = std::sqrt((res.yes_accept * (1 - res.yes_accept) + res.no_accept * (1 - res.no_accept)) / T);
  return res;
}

void write_distinguish_csv_header(std::ostream& out) { out << "s,trials,yes_accept,no_accept,advantage,stderr\n"; }

void write_distinguish_csv_row(std::ostream& out, const DistinguishResult& r) {
  const auto old = out.precision(10);
  out << r.samples << ',' << r.trials << ',' << r.yes_accept << ',' << r.no_accept << ',' << r.advantage << ','
      << r.stderr_ << '\n';
  out.precision(old);
}

const char* to_string(FarnessReport::Method method) {
  return method == FarnessReport::Method::exact ? "exact" : "chain_bound";
}

FarnessReport farness_report(const TalagrandInstance& instance, const Budget& budget) {
  const auto f = instance.materialize(budget);
  const int k = instance.params().k;
  FarnessReport rep;
  if (is_k_monotone(f, k, budget)) {
    rep.distance = Fraction(0);
    return rep;
  }
  const double log_count = static_cast<double>(f.size()) * std::log2(static_cast<double>(f.r()));
  if (log_count <= std::log2(static_cast<double>(budget.enumeration))) {
    rep.distance = exact_distance_to_k_monotone(f, k, budget);
    return rep;
  }
  rep.method = FarnessReport::Method::chain_bound;
  rep.distance = Fraction(0);
  const int longest = longest_alternating_chain(f, budget);
  for (int len = 3 * k; len <= longest; ++len) {
    const auto family = greedy_disjoint_chains(f, len, budget);
    if (family.chains.empty()) continue;
    const Fraction bound = chain_lower_bound(f, family, k);
    if (bound > rep.distance) {
      rep.distance = bound;
      rep.chains = family.chains.size();
      rep.chain_length = len;
    }
  }
  return rep;
}

}  // namespace kmono
