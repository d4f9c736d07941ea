#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kmono/core.hpp"
#include "kmono/oracle.hpp"

namespace kmono {

// Sign of Σ_{|S| ≤ tau} Z_S χ_S(x), where Z_S are noise-corrected empirical
// Fourier coefficients. A zero sum predicts +1 (label 1).
struct LowDegreeHypothesis {
  int d = 0;
  int tau = 0;
  double eta = 0.0;
  std::size_t samples = 0;
  std::vector<Mask> masks;         // every S with |S| ≤ tau, by popcount then value
  Eigen::VectorXd coeffs;          // Z_S, aligned with masks
  std::vector<std::int64_t> sums;  // Σ_i y_i χ_S(x_i); Z_S = sums / (s(1−2η))

  // Σ_S Z_S χ_S(x).
  double score(Mask x) const;
  // Evaluated on the integer sums so ties are exact.
  int predict(Mask x) const;
  FunctionTable to_table() const;
};

// Per-point vote counts; h(x) = sgn(m⁺_x − m⁻_x) with ties and unseen points → +1.
struct MajorityTable {
  Domain domain;
  std::vector<std::uint32_t> plus;
  std::vector<std::uint32_t> minus;

  explicit MajorityTable(Domain domain);
  std::uint32_t seen(std::uint64_t x) const { return plus[x] + minus[x]; }
  int predict(std::uint64_t x) const { return plus[x] >= minus[x] ? 1 : 0; }
  FunctionTable to_table() const;
};

using BooleanHypothesis = std::variant<LowDegreeHypothesis, MajorityTable, FunctionTable>;

int predict(const BooleanHypothesis& h, std::uint64_t x);

// h(x) = max{t : h_t(x) = 1}, or 0 when no threshold fires. levels[t-1] is h_t.
struct ThresholdHypothesis {
  int r = 2;
  std::vector<BooleanHypothesis> levels;

  int predict(std::uint64_t x) const;
};

using Hypothesis = std::variant<LowDegreeHypothesis, MajorityTable, FunctionTable, ThresholdHypothesis>;

int predict(const Hypothesis& h, std::uint64_t x);
// Tabulates h over `domain` with r output values.
FunctionTable tabulate(const Hypothesis& h, const Domain& domain, int r);
// Fraction of points of f's domain where h disagrees with f.
double exact_error(const Hypothesis& h, const FunctionTable& f);

// All masks of popcount ≤ tau over d bits, by popcount then value.
std::vector<Mask> masks_up_to_degree(int d, int tau);
std::uint64_t count_up_to_degree(int d, int tau);

// How the empirical coefficients are accumulated: per-mask sums over the
// examples, or one transform of the per-point label histogram. Both give
// identical integer sums.
enum class EstimationRoute { automatic, direct, transform };

// Z_S = (1/(1-2η))·mean(y·χ_S(x)) for |S| ≤ tau from s examples of a Boolean
// hypercube oracle. tau > d is clamped to d with a warning on stderr.
LowDegreeHypothesis low_degree_learn(const OracleConfig& cfg, int tau, std::size_t s,
                                     EstimationRoute route = EstimationRoute::automatic);

// ⌈c·(1/(ε²(1−2η)²) + ln(1/δ))·Σ_{i≤τ} C(d,i)⌉. Throws BudgetError past budget.samples.
std::uint64_t low_degree_sample_size(double eps, double delta, double eta, int d, int tau, double c = 1.0,
                                     const Budget& budget = {});

// ⌈k√d/ε⌉ clamped to [0, d].
int kmono_degree_cutoff(int k, int d, double eps);

LowDegreeHypothesis kmono_learn_hypercube(const OracleConfig& cfg, int k, double eps, std::size_t s);

// Majority vote over s examples of a hypergrid (or hypercube) oracle.
MajorityTable coupon_learn(const OracleConfig& cfg, std::size_t s);

// Votes per point after which a noisy majority errs with probability ≤ beta:
// 2/(1−2η)²·ln(2/β).
double majority_votes_needed(double eta, double beta);

// m·ln(2m/δ)·N^(2d) with m = 2/(1−2η)²·ln(4/(εδ)), rounded up. Throws BudgetError
// when the count exceeds budget.samples.
std::uint64_t coupon_sample_size(double eps, double delta, double eta, int n, int d, const Budget& budget = {});
// Same quantity in natural log, never overflows.
double coupon_sample_size_log(double eps, double delta, double eta, int n, int d);

// Learns a Boolean target to error eps with confidence 1 − delta.
using BooleanLearner = std::function<BooleanHypothesis(const OracleConfig&, double eps, double delta)>;

// Learns each threshold f_t = 1(f ≥ t), t = 1..r−1, to error ε/r with
// confidence δ/r on its own example stream, and composes them. Requires a
// noiseless oracle.
ThresholdHypothesis threshold_compose_learn(const OracleConfig& cfg, const BooleanLearner& base, double eps,
                                            double delta);

// f_t(x) = 1(f(x) ≥ t).
FunctionTable threshold_table(const FunctionTable& f, int t);

}  // namespace kmono
