#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "kmono/core.hpp"
#include "kmono/oracle.hpp"
#include "kmono/rng.hpp"

namespace kmono {

// Random Talagrand DNF construction. The Hamming-weight window
// [d/2, d/2 + ε√d) is cut into k(r−1) consecutive blocks; block i carries a
// random DNF of width-w terms whose values lie in {i mod (r−1), i mod (r−1) + 1}.
struct TalagrandParams {
  int d = 0;
  int r = 2;
  int k = 1;
  double eps = 0.0;
  int width = 1;                                // w
  std::vector<std::uint64_t> terms_per_block;   // N_i
  std::vector<int> block_bounds;                // k(r−1)+1 weights; block i = [b_i, b_{i+1})

  struct Overrides {
    std::optional<int> width;
    std::optional<std::vector<std::uint64_t>> terms_per_block;
    std::optional<std::vector<int>> block_bounds;
  };

  // Defaults: w = ⌈(r−1)k√d/(2ε)⌉, N_i = max(1, round(2^w·e^−i)), equal blocks
  // with the last one absorbing the remainder. Throws std::invalid_argument for
  // an unusable window and BudgetError when 2^w or Σ N_i is too large.
  static TalagrandParams make(int d, int r, int k, double eps, const Overrides& overrides);
  static TalagrandParams make(int d, int r, int k, double eps) { return make(d, r, k, eps, Overrides{}); }

  int blocks() const noexcept { return static_cast<int>(terms_per_block.size()); }
  int window_begin() const noexcept { return block_bounds.front(); }
  int window_end() const noexcept { return block_bounds.back(); }
  int low_value(int block) const noexcept { return block % (r - 1); }
};

void validate(const TalagrandParams& params);

// Block containing x, or nothing when |x| lies outside the window.
std::optional<int> block_index(Mask x, const TalagrandParams& params);

// Indicator of w independent uniform draws from [d] (a multiset, so
// popcount ≤ w).
Mask sample_term(int d, int w, CounterRng& rng);

using TermSampler = std::function<Mask(CounterRng&)>;

struct TermSet {
  std::vector<std::vector<Mask>> terms;  // terms[i][j] = t^{i,j}
};

TermSet sample_terms(const TalagrandParams& params, CounterRng& rng);

// D_yes: one label per term, shared by all of U_{i,j}.
struct YesLabels {
  std::vector<std::vector<std::uint8_t>> phi;  // phi[i][j] ∈ {i mod (r−1), i mod (r−1) + 1}
};

// D_no: an independent label per point of U_i, from a keyed PRF so the
// function is evaluated lazily yet consistently.
struct NoLabels {
  std::uint64_t key = 0;
};

class TalagrandInstance {
 public:
  using Labels = std::variant<YesLabels, NoLabels>;

  TalagrandInstance(TalagrandParams params, TermSet terms, Labels labels);

  static TalagrandInstance sample_yes(const TalagrandParams& params, std::uint64_t seed);
  static TalagrandInstance sample_no(const TalagrandParams& params, std::uint64_t seed);

  // Same terms, other variant.
  TalagrandInstance with_yes_labels(std::uint64_t seed) const;
  TalagrandInstance with_no_labels(std::uint64_t key) const;

  const TalagrandParams& params() const noexcept { return params_; }
  const TermSet& terms() const noexcept { return terms_; }
  const Labels& labels() const noexcept { return labels_; }
  bool is_yes() const noexcept { return std::holds_alternative<YesLabels>(labels_); }

  // j such that x lies in U_{i,j} for its block i.
  std::optional<std::size_t> unique_satisfier(Mask x) const;
  // (i, j) of the U_{i,j} containing x.
  std::optional<std::pair<int, std::size_t>> unique_cell(Mask x) const;
  int eval(Mask x) const;
  // Full table; d ≤ budget.max_chain_dim.
  FunctionTable materialize(const Budget& budget = {}) const;

 private:
  TalagrandParams params_;
  TermSet terms_;
  Labels labels_;
};

// Exact k-monotonicity check of a yes-instance. Throws for a no-instance.
bool verify_yes_k_monotone(const TalagrandInstance& instance, const Budget& budget = {});

struct UniqueProbEstimate {
  int block = 0;
  std::uint64_t terms = 0;  // N_i
  std::size_t trials = 0;
  double per_term = 0.0;    // P[x ∈ U_{i,0}], x uniform on B_i
  double per_term_stderr = 0.0;
  double any = 0.0;         // P[x ∈ U_i]
  double any_stderr = 0.0;
  double lower_band = 0.0;  // 1/(20 N_i)
  double upper_band = 0.0;  // 3/N_i
  bool per_term_in_band = false;
  bool any_above_twentieth = false;
};

// Monte-Carlo estimate over fresh terms and x uniform on B_i. The bands are
// asymptotic and only reported.
UniqueProbEstimate estimate_unique_prob(const TalagrandParams& params, int block, std::size_t trials,
                                        std::uint64_t seed, const TermSampler& sampler = {});

// Closed form of the same quantities: with p = (|x|/d)^w,
// P[x ∈ U_{i,j}] = p(1 − p)^(N_i − 1), averaged over |x| in the block.
std::pair<double, double> unique_prob_exact(const TalagrandParams& params, int block);

// Decides accept (true) / reject from the instance and s labeled examples.
// Oracle-aware testers may inspect the instance's terms.
using SampleTester = std::function<bool(const TalagrandInstance&, std::span<const LabeledExample>)>;

// Rejects iff two examples fall in one U_{i,j} with different labels.
bool birthday_distinguisher(const TalagrandInstance& instance, std::span<const LabeledExample> sample);
bool always_accept(const TalagrandInstance&, std::span<const LabeledExample>);

struct DistinguishResult {
  std::size_t samples = 0;
  std::size_t trials = 0;
  double yes_accept = 0.0;
  double no_accept = 0.0;
  double advantage = 0.0;  // yes_accept − no_accept
  double stderr_ = 0.0;
};

// Per trial: a fresh yes- and no-instance, s uniform examples each, one verdict each.
DistinguishResult distinguishing_experiment(const TalagrandParams& params, const SampleTester& tester,
                                            std::size_t s, std::size_t trials, std::uint64_t seed,
                                            unsigned workers = 1);

void write_distinguish_csv_header(std::ostream& out);
void write_distinguish_csv_row(std::ostream& out, const DistinguishResult& result);

struct FarnessReport {
  enum class Method { exact, chain_bound };
  Method method = Method::exact;
  Fraction distance;           // exact value, or a lower bound
  std::size_t chains = 0;      // chain_bound only
  int chain_length = 0;        // chain_bound only
};

const char* to_string(FarnessReport::Method method);

// Exact distance when the enumeration budget allows, else the best greedy
// chain lower bound over chain lengths 3k..longest.
FarnessReport farness_report(const TalagrandInstance& instance, const Budget& budget = {});

}  // namespace kmono
