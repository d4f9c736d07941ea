#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kmono/core.hpp"
#include "kmono/learners.hpp"
#include "kmono/rng.hpp"

namespace kmono {

struct UniformLaw {
  double a = 0.0;
  double b = 1.0;
};
struct ExponentialLaw {
  double rate = 1.0;
};
struct GaussianLaw {
  double mean = 0.0;
  double sd = 1.0;
};
// Uniform over a finite list of observed values.
struct EmpiricalLaw {
  std::vector<double> values;
};

using CoordinateLaw = std::variant<UniformLaw, ExponentialLaw, GaussianLaw, EmpiricalLaw>;

double sample(const CoordinateLaw& law, CounterRng& rng);
// P[X ≤ x].
double cdf(const CoordinateLaw& law, double x);

struct ProductMeasure {
  std::vector<CoordinateLaw> coords;

  int d() const noexcept { return static_cast<int>(coords.size()); }
  Eigen::VectorXd sample(CounterRng& rng) const;
};

void validate(const ProductMeasure& mu);

// Grid partition of ℝ^d into [N]^d. Coordinate i of block(x) counts the
// breakpoints strictly below x_i, so cell z is the half-open interval
// (b_{z−1}, b_z] and a point on a breakpoint goes to the left cell.
class BlockMap {
 public:
  // breakpoints: d × (N−1), strictly increasing along each row.
  // representatives: d × N, entry (i, z) inside cell z of coordinate i.
  BlockMap(int n, Eigen::MatrixXd breakpoints, Eigen::MatrixXd representatives);

  int d() const noexcept { return static_cast<int>(reps_.rows()); }
  int n() const noexcept { return n_; }
  Domain grid() const { return Domain::hypergrid(d(), n_); }
  const Eigen::MatrixXd& breakpoints() const noexcept { return breaks_; }
  const Eigen::MatrixXd& representatives() const noexcept { return reps_; }

  int cell(int coord, double value) const;
  std::vector<int> block(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // block(x) as a hypergrid index.
  std::uint64_t block_index(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd blockpoint(std::span<const int> z) const;
  Eigen::VectorXd blockpoint(std::uint64_t index) const;

 private:
  int n_;
  Eigen::MatrixXd breaks_;
  Eigen::MatrixXd reps_;
};

// Breakpoint j is the ⌈jm/N⌉-th order statistic of m draws per coordinate;
// representatives are lower medians of the draws in each cell, or the cell
// midpoint when a cell is empty. Throws std::invalid_argument when N is not a
// power of two, m < N, or ties make the breakpoints non-increasing.
BlockMap build_block_map(const ProductMeasure& mu, int n, std::size_t m, std::uint64_t seed, unsigned workers = 1);

using RealFunction = std::function<int(const Eigen::VectorXd&)>;

// f^block(z) = f(blockpoint(z)) tabulated over [N]^d.
FunctionTable f_block(const RealFunction& f, const BlockMap& bm, int r = 2);

struct RateEstimate {
  double rate = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// P_{x∼μ}[f(x) ≠ table(block(x))].
RateEstimate estimate_block_mismatch(const ProductMeasure& mu, const RealFunction& f, const BlockMap& bm,
                                     const FunctionTable& table, std::size_t samples, std::uint64_t seed);

// ‖block(μ) − unif([N]^d)‖_TV from the coordinate CDFs. N^d ≤ 2^24.
double block_tv_exact(const ProductMeasure& mu, const BlockMap& bm);
// Same distance from the histogram of fresh draws; biased upward by sampling noise.
double block_tv_empirical(const ProductMeasure& mu, const BlockMap& bm, std::size_t samples, std::uint64_t seed);

// Hypergrid to hypercube: each coordinate becomes its log2 N binary digits,
// most significant first; digit t of coordinate c is bit c·log2 N + t.
// bitmap(x) ⪯ bitmap(y) implies x ⪯ y, not conversely.
Mask bitmap(std::span<const int> z, int n);
Mask bitmap_index(std::uint64_t grid_index, int d, int n);
std::uint64_t unbitmap(Mask x, int d, int n);
// f^cube over {0,1}^(d log2 N).
FunctionTable cube_table(const FunctionTable& grid_f);

// Smallest power of two N with N ≥ 8kd/ε.
int choose_grid_side(int k, int d, double eps);

enum class InnerLearner { automatic, coupon, cube };

struct Algorithm1Options {
  int r = 2;
  std::optional<int> grid_side;                // N
  std::optional<std::size_t> block_samples;    // m
  std::optional<std::size_t> learner_samples;  // Q
  InnerLearner learner = InnerLearner::automatic;
  // The block-map sample formula is astronomically large at any useful Q;
  // the default m is capped here and the cap is reported.
  std::size_t block_sample_cap = std::size_t{1} << 20;
  double c = 1.0;  // constant of the low-degree sample size
  Budget budget;
  unsigned workers = 1;
};

struct Algorithm1Hypothesis {
  BlockMap map;
  InnerLearner learner = InnerLearner::coupon;
  Hypothesis inner;
  int r = 2;
  int tau = 0;                     // cube route only
  std::size_t learner_samples = 0;  // Q (per threshold level when r > 2)
  std::size_t block_samples = 0;    // m
  bool block_samples_capped = false;
  double coupon_log_cost = 0.0;     // natural log of each route's formula
  double cube_log_cost = 0.0;

  int predict(const Eigen::VectorXd& x) const;
};

// Learns a k-monotone f: ℝ^d → [r] under μ: choose N, build the block map,
// relabel examples (block(x), f(x)) and run the cheaper grid learner.
// Throws BudgetError naming both costs when neither fits budget.samples.
Algorithm1Hypothesis algorithm1_learn(const ProductMeasure& mu, const RealFunction& f, int k, double eps,
                                      double delta, std::uint64_t seed, const Algorithm1Options& options = {});

// P_{x∼μ}[h(x) ≠ f(x)] on fresh draws.
RateEstimate estimate_error(const Algorithm1Hypothesis& h, const ProductMeasure& mu, const RealFunction& f,
                            std::size_t samples, std::uint64_t seed);

}  // namespace kmono
