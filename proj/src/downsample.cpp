#include "kmono/downsample.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "kmono/parallel.hpp"

namespace kmono {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool power_of_two(int n) { return n >= 1 && std::has_single_bit(static_cast<unsigned>(n)); }

int log2_side(int n) {
  if (!power_of_two(n)) throw std::invalid_argument("grid side N = " + std::to_string(n) + " is not a power of two");
  return std::countr_zero(static_cast<unsigned>(n));
}

}  // namespace

double sample(const CoordinateLaw& law, CounterRng& rng) {
  return std::visit(overloaded{[&](const UniformLaw& u) { return u.a + (u.b - u.a) * rng.uniform01(); },
                               [&](const ExponentialLaw& e) { return rng.exponential(e.rate); },
                               [&](const GaussianLaw& g) { return rng.normal(g.mean, g.sd); },
                               [&](const EmpiricalLaw& e) { return e.values[rng.below(e.values.size())]; }},
                    law);
}

double cdf(const CoordinateLaw& law, double x) {
  return std::visit(
      overloaded{[&](const UniformLaw& u) { return std::clamp((x - u.a) / (u.b - u.a), 0.0, 1.0); },
                 [&](const ExponentialLaw& e) { return x <= 0 ? 0.0 : -std::expm1(-e.rate * x); },
                 [&](const GaussianLaw& g) { return 0.5 * std::erfc(-(x - g.mean) / (g.sd * std::sqrt(2.0))); },
                 [&](const EmpiricalLaw& e) {
                   const auto hits = std::count_if(e.values.begin(), e.values.end(), [&](double v) { return v <= x; });
                   return static_cast<double>(hits) / static_cast<double>(e.values.size());
                 }},
      law);
}

Eigen::VectorXd ProductMeasure::sample(CounterRng& rng) const {
  Eigen::VectorXd x(d());
  for (int i = 0; i < d(); ++i) x[i] = kmono::sample(coords[static_cast<std::size_t>(i)], rng);
  return x;
}

void validate(const ProductMeasure& mu) {
  if (mu.coords.empty()) throw std::invalid_argument("product measure has no coordinates");
  for (std::size_t i = 0; i < mu.coords.size(); ++i) {
    const bool ok = std::visit(overloaded{[](const UniformLaw& u) { return u.a < u.b; },
                                          [](const ExponentialLaw& e) { return e.rate > 0; },
                                          [](const GaussianLaw& g) { return g.sd > 0; },
                                          [](const EmpiricalLaw& e) { return !e.values.empty(); }},
                               mu.coords[i]);
    if (!ok) throw std::invalid_argument("coordinate " + std::to_string(i) + ": degenerate law");
  }
}

BlockMap::BlockMap(int n, Eigen::MatrixXd breakpoints, Eigen::MatrixXd representatives)
    : n_(n), breaks_(std::move(breakpoints)), reps_(std::move(representatives)) {
  log2_side(n_);
  if (reps_.rows() < 1 || reps_.cols() != n_ || breaks_.rows() != reps_.rows() || breaks_.cols() != n_ - 1)
    throw std::invalid_argument("BlockMap: need d x (N-1) breakpoints and d x N representatives");
  for (Eigen::Index i = 0; i < breaks_.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < breaks_.cols(); ++j)
      if (!(breaks_(i, j) < breaks_(i, j + 1)))
        throw std::invalid_argument("BlockMap: breakpoints of coordinate " + std::to_string(i) +
                                    " are not strictly increasing");
    for (int z = 0; z < n_; ++z)
      if (cell(static_cast<int>(i), reps_(i, z)) != z)
        throw std::invalid_argument("BlockMap: representative of cell " + std::to_string(z) + " on coordinate " +
                                    std::to_string(i) + " lies outside it");
  }
}

int BlockMap::cell(int coord, double value) const {
  const auto row = breaks_.row(coord);
  // Count of breakpoints strictly below value.
  int lo = 0, hi = static_cast<int>(row.size());
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (row[mid] < value)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::vector<int> BlockMap::block(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != d()) throw std::invalid_argument("BlockMap::block: dimension mismatch");
  std::vector<int> z(static_cast<std::size_t>(d()));
  for (int i = 0; i < d(); ++i) z[static_cast<std::size_t>(i)] = cell(i, x[i]);
  return z;
}

std::uint64_t BlockMap::block_index(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != d()) throw std::invalid_argument("BlockMap::block_index: dimension mismatch");
  std::uint64_t idx = 0, stride = 1;
  for (int i = 0; i < d(); ++i) {
    idx += static_cast<std::uint64_t>(cell(i, x[i])) * stride;
    stride *= static_cast<std::uint64_t>(n_);
  }
  return idx;
}

Eigen::VectorXd BlockMap::blockpoint(std::span<const int> z) const {
  if (static_cast<int>(z.size()) != d()) throw std::invalid_argument("BlockMap::blockpoint: dimension mismatch");
  Eigen::VectorXd x(d());
  for (int i = 0; i < d(); ++i) {
    const int zi = z[static_cast<std::size_t>(i)];
    if (zi < 0 || zi >= n_) throw std::invalid_argument("BlockMap::blockpoint: cell outside [N]");
    x[i] = reps_(i, zi);
  }
  return x;
}

Eigen::VectorXd BlockMap::blockpoint(std::uint64_t index) const {
  const auto z = grid().coords(index);
  return blockpoint(std::span<const int>(z));
}

BlockMap build_block_map(const ProductMeasure& mu, int n, std::size_t m, std::uint64_t seed, unsigned workers) {
  validate(mu);
  log2_side(n);
  if (m < static_cast<std::size_t>(n))
    throw std::invalid_argument("build_block_map: need m >= N samples per coordinate (m = " + std::to_string(m) +
                                ", N = " + std::to_string(n) + ")");
  const int d = mu.d();
  Eigen::MatrixXd breaks(d, n - 1), reps(d, n);
  std::vector<std::string> problems(static_cast<std::size_t>(d));

  parallel_for(static_cast<std::size_t>(d), workers, [&](std::size_t c) {
    CounterRng rng(seed, c);
    std::vector<double> xs(m);
    for (auto& v : xs) v = sample(mu.coords[c], rng);
    std::sort(xs.begin(), xs.end());
    const auto row = static_cast<Eigen::Index>(c);
    for (int j = 1; j < n; ++j) {
      // ⌈jm/N⌉-th order statistic.
      const std::size_t rank = (static_cast<std::size_t>(j) * m + static_cast<std::size_t>(n) - 1) / static_cast<std::size_t>(n);
      breaks(row, j - 1) = xs[rank - 1];
    }
    for (int j = 1; j + 1 < n; ++j)
      if (!(breaks(row, j - 1) < breaks(row, j))) {
        problems[c] = "tied quantiles on coordinate " + std::to_string(c) + "; increase m or use a law without atoms";
        return;
      }
    auto first = xs.begin();
    for (int z = 0; z < n; ++z) {
      // Samples in (b_{z-1}, b_z].
      const auto last = z + 1 < n ? std::upper_bound(first, xs.end(), breaks(row, z)) : xs.end();
      if (first != last) {
        reps(row, z) = *(first + (last - first - 1) / 2);
      } else {
        const double lo = z > 0 ? breaks(row, z - 1) : xs.front();
        const double hi = z + 1 < n ? breaks(row, z) : xs.back();
        reps(row, z) = 0.5 * (lo + hi);  // checked against the cell by BlockMap
      }
      first = last;
    }
  });
  for (const auto& p : problems)
    if (!p.empty()) throw std::invalid_argument("build_block_map: " + p);
  return BlockMap(n, std::move(breaks), std::move(reps));
}

FunctionTable f_block(const RealFunction& f, const BlockMap& bm, int r) {
  if (!f) throw std::invalid_argument("f_block: no function");
  return FunctionTable::tabulate(bm.grid(), r, [&](std::uint64_t z) { return f(bm.blockpoint(z)); });
}

RateEstimate estimate_block_mismatch(const ProductMeasure& mu, const RealFunction& f, const BlockMap& bm,
                                     const FunctionTable& table, std::size_t samples, std::uint64_t seed) {
  if (table.domain() != bm.grid()) throw std::invalid_argument("estimate_block_mismatch: table is not over [N]^d");
  if (samples == 0) throw std::invalid_argument("estimate_block_mismatch: samples must be positive");
  CounterRng rng(seed);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd x = mu.sample(rng);
    bad += f(x) != table[bm.block_index(x)];
  }
  RateEstimate e;
  e.samples = samples;
  e.rate = static_cast<double>(bad) / static_cast<double>(samples);
  e.stderr_ = std::sqrt(e.rate * (1 - e.rate) / static_cast<double>(samples));
  return e;
}

double block_tv_exact(const ProductMeasure& mu, const BlockMap& bm) {
  validate(mu);
  if (mu.d() != bm.d()) throw std::invalid_argument("block_tv_exact: dimension mismatch");
  const Domain grid = bm.grid();
  if (grid.size() > (std::uint64_t{1} << 24)) throw BudgetError("block_tv_exact: N^d exceeds 2^24 cells", "cells");
  Eigen::MatrixXd mass(bm.d(), bm.n());
  for (int i = 0; i < bm.d(); ++i) {
    double prev = 0.0;
    for (int z = 0; z < bm.n(); ++z) {
      const double next = z + 1 < bm.n() ? cdf(mu.coords[static_cast<std::size_t>(i)], bm.breakpoints()(i, z)) : 1.0;
      mass(i, z) = next - prev;
      prev = next;
    }
  }
  const double uniform = 1.0 / static_cast<double>(grid.size());
  double tv = 0.0;
  for (std::uint64_t idx = 0; idx < grid.size(); ++idx) {
    const auto z = grid.coords(idx);
    double p = 1.0;
    for (int i = 0; i < bm.d(); ++i) p *= mass(i, z[static_cast<std::size_t>(i)]);
    tv += std::abs(p - uniform);
  }
  return 0.5 * tv;
}

double block_tv_empirical(const ProductMeasure& mu, const BlockMap& bm, std::size_t samples, std::uint64_t seed) {
  validate(mu);
  if (samples == 0) throw std::invalid_argument("block_tv_empirical: samples must be positive");
  const Domain grid = bm.grid();
  if (grid.size() > (std::uint64_t{1} << 24)) throw BudgetError("block_tv_empirical: N^d exceeds 2^24 cells", "cells");
  std::vector<std::uint64_t> hist(grid.size());
  CounterRng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) ++hist[bm.block_index(mu.sample(rng))];
  const double uniform = 1.0 / static_cast<double>(grid.size());
  double tv = 0.0;
  for (auto c : hist) tv += std::abs(static_cast<double>(c) / static_cast<double>(samples) - uniform);
  return 0.5 * tv;
}

Mask bitmap(std::span<const int> z, int n) {
  const int bits = log2_side(n);
  if (static_cast<int>(z.size()) * bits > 64) throw std::invalid_argument("bitmap: d log2 N exceeds 64");
  Mask out = 0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    if (z[c] < 0 || z[c] >= n) throw std::invalid_argument("bitmap: coordinate outside [N]");
    for (int t = 0; t < bits; ++t)
      if ((z[c] >> (bits - 1 - t)) & 1) out |= Mask{1} << (static_cast<int>(c) * bits + t);
  }
  return out;
}

Mask bitmap_index(std::uint64_t grid_index, int d, int n) {
  const auto z = Domain::hypergrid(d, n).coords(grid_index);
  return bitmap(std::span<const int>(z), n);
}

std::uint64_t unbitmap(Mask x, int d, int n) {
  const int bits = log2_side(n);
  if (d * bits > 64) throw std::invalid_argument("unbitmap: d log2 N exceeds 64");
  std::uint64_t idx = 0, stride = 1;
  for (int c = 0; c < d; ++c) {
    int v = 0;
    for (int t = 0; t < bits; ++t) v = (v << 1) | static_cast<int>((x >> (c * bits + t)) & 1);
    idx += static_cast<std::uint64_t>(v) * stride;
    stride *= static_cast<std::uint64_t>(n);
  }
  return idx;
}

FunctionTable cube_table(const FunctionTable& grid_f) {
  const Domain& g = grid_f.domain();
  if (g.kind != DomainKind::hypergrid) throw std::invalid_argument("cube_table: table is not over a hypergrid");
  const int bits = log2_side(g.n);
  if (g.d * bits > kMaxCubeDim) throw std::invalid_argument("cube_table: d log2 N exceeds 26");
  return FunctionTable::tabulate(Domain::hypercube(g.d * bits), grid_f.r(),
                                 [&](std::uint64_t x) { return grid_f[unbitmap(x, g.d, g.n)]; });
}

int choose_grid_side(int k, int d, double eps) {
  if (k < 1 || d < 1 || !(eps > 0 && eps < 1)) throw std::invalid_argument("choose_grid_side: need k, d >= 1 and eps in (0, 1)");
  const double lower = 8.0 * k * d / eps;
  if (lower > static_cast<double>(1 << 30)) throw std::invalid_argument("choose_grid_side: 8kd/eps exceeds 2^30");
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::ceil(lower - 1e-9))));
}

int Algorithm1Hypothesis::predict(const Eigen::VectorXd& x) const {
  const std::uint64_t z = map.block_index(x);
  const std::uint64_t point = learner == InnerLearner::cube ? bitmap_index(z, map.d(), map.n()) : z;
  return kmono::predict(inner, point);
}

Algorithm1Hypothesis algorithm1_learn(const ProductMeasure& mu, const RealFunction& f, int k, double eps,
                                      double delta, std::uint64_t seed, const Algorithm1Options& options) {
  validate(mu);
  if (!f) throw std::invalid_argument("algorithm1_learn: no target function");
  if (k < 1) throw std::invalid_argument("algorithm1_learn: k must be >= 1");
  if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1))
    throw std::invalid_argument("algorithm1_learn: eps and delta must lie in (0, 1)");
  const int r = options.r;
  if (r < 2 || r > 256) throw std::invalid_argument("algorithm1_learn: r must lie in [2, 256]");
  const int d = mu.d();
  const int n = options.grid_side ? *options.grid_side : choose_grid_side(k, d, eps);
  const int bits = log2_side(n);
  const double grid_log_size = d * std::log(static_cast<double>(n));
  if (grid_log_size > 40 * std::log(2.0)) throw std::invalid_argument("algorithm1_learn: N^d exceeds 2^40 cells");

  // Per-level accuracy; mislabeling by the block map acts like noise of rate ≤ ε.
  const double level_eps = r > 2 ? eps / r : eps;
  const double level_delta = r > 2 ? delta / r : delta;
  const double eta_assumed = std::min(eps, 0.45);
  const double margin = 1.0 - 2.0 * eta_assumed;

  const double coupon_log = coupon_sample_size_log(level_eps, level_delta, eta_assumed, n, d);
  const int cube_dim = d * bits;
  const int tau = kmono_degree_cutoff(k, cube_dim, level_eps);
  double cube_log = std::numeric_limits<double>::infinity();
  if (cube_dim <= kMaxCubeDim)
    cube_log = std::log(options.c * (1.0 / (level_eps * level_eps * margin * margin) + std::log(1.0 / level_delta))) +
               std::log(static_cast<double>(count_up_to_degree(cube_dim, tau)));

  const double cap = std::log(static_cast<double>(options.budget.samples));
  InnerLearner route = options.learner;
  if (route == InnerLearner::automatic) {
    if (!options.learner_samples && coupon_log > cap && cube_log > cap) {
      std::ostringstream msg;
      msg << "algorithm1_learn: both grid learners exceed the sample budget (coupon needs e^" << coupon_log
          << ", hypercube mapping needs " << (std::isfinite(cube_log) ? "e^" + std::to_string(cube_log) : "d log N <= 26")
          << ")";
      throw BudgetError(msg.str(), "samples=" + std::to_string(options.budget.samples));
    }
    route = coupon_log <= cube_log ? InnerLearner::coupon : InnerLearner::cube;
  }
  if (route == InnerLearner::cube && cube_dim > kMaxCubeDim)
    throw std::invalid_argument("algorithm1_learn: d log2 N = " + std::to_string(cube_dim) + " exceeds 26");

  std::size_t q = 0;
  if (options.learner_samples) {
    q = *options.learner_samples;
  } else {
    const double chosen = route == InnerLearner::coupon ? coupon_log : cube_log;
    if (chosen > cap)
      throw BudgetError("algorithm1_learn: chosen learner needs e^" + std::to_string(chosen) + " samples",
                        "samples=" + std::to_string(options.budget.samples));
    q = static_cast<std::size_t>(std::ceil(std::exp(chosen)));
  }
  if (q == 0) throw std::invalid_argument("algorithm1_learn: learner sample count must be positive");

  // Block-map samples: 18Nd²/β² ln(16Nd/δ) with β = min(δ/(4Q), ε/8), capped.
  std::size_t m = 0;
  bool capped = false;
  if (options.block_samples) {
    m = *options.block_samples;
  } else {
    const double beta = std::min(delta / (4.0 * static_cast<double>(q)), eps / 8.0);
    const double formula = 18.0 * n * d * d / (beta * beta) * std::log(16.0 * n * d / delta);
    capped = !(formula <= static_cast<double>(options.block_sample_cap));
    m = capped ? options.block_sample_cap : static_cast<std::size_t>(std::ceil(formula));
    m = std::max<std::size_t>(m, static_cast<std::size_t>(n));
  }

  BlockMap bm = build_block_map(mu, n, m, derive_key(seed, 1), options.workers);

  const Domain grid = bm.grid();
  const Domain inner_domain = route == InnerLearner::cube ? Domain::hypercube(cube_dim) : grid;
  OracleConfig cfg;
  cfg.r = r;
  cfg.seed = derive_key(seed, 2);
  cfg.distribution = CustomDistribution{[&mu, &f, &bm, route, d, n](CounterRng& rng) {
                                          const Eigen::VectorXd x = mu.sample(rng);
                                          const std::uint64_t z = bm.block_index(x);
                                          const std::uint64_t point = route == InnerLearner::cube ? bitmap_index(z, d, n) : z;
                                          return LabeledExample{point, f(x)};
                                        },
                                        inner_domain};

  BooleanLearner base = [route, tau, q](const OracleConfig& sub, double, double) -> BooleanHypothesis {
    if (route == InnerLearner::coupon) return coupon_learn(sub, q).to_table();
    return low_degree_learn(sub, tau, q).to_table();
  };

  Hypothesis inner;
  if (r == 2)
    inner = std::visit([](auto&& h) -> Hypothesis { return h; }, base(cfg, eps, delta));
  else
    inner = threshold_compose_learn(cfg, base, eps, delta);

  Algorithm1Hypothesis out{std::move(bm)};
  out.learner = route;
  out.inner = std::move(inner);
  out.r = r;
  out.tau = route == InnerLearner::cube ? tau : 0;
  out.learner_samples = q;
  out.block_samples = m;
  out.block_samples_capped = capped;
  out.coupon_log_cost = coupon_log;
  out.cube_log_cost = cube_log;
  return out;
}

RateEstimate estimate_error(const Algorithm1Hypothesis& h, const ProductMeasure& mu, const RealFunction& f,
                            std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("estimate_error: samples must be positive");
  CounterRng rng(seed);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd x = mu.sample(rng);
    bad += h.predict(x) != f(x);
  }
  RateEstimate e;
  e.samples = samples;
  e.rate = static_cast<double>(bad) / static_cast<double>(samples);
  e.stderr_ = std::sqrt(e.rate * (1 - e.rate) / static_cast<double>(samples));
  return e;
}

}  // namespace kmono
