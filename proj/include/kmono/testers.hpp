#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kmono/core.hpp"
#include "kmono/fraction.hpp"
#include "kmono/oracle.hpp"

namespace kmono {

enum class Decision { accept, reject };

struct TestVerdict {
  Decision decision = Decision::accept;
  std::optional<double> alpha;                 // two-sided: empirical d(f, g)
  std::optional<AlternatingChain> witness;     // one-sided rejections only
  std::size_t samples_used = 0;
  std::uint64_t seed = 0;

  bool accepted() const noexcept { return decision == Decision::accept; }
};

// A learner used by the tester: returns a total hypothesis table and the
// number of examples it consumed.
struct LearnedTable {
  FunctionTable hypothesis;
  std::size_t samples = 0;
};
using TableLearner = std::function<LearnedTable(const OracleConfig&, double eps)>;
// Maps a hypothesis to a nearest member of the tested class.
using Projector = std::function<FunctionTable(const FunctionTable&)>;

// s' = ⌈20/ε²⌉ fresh examples for the distance estimate.
std::size_t fresh_sample_count(double eps);
// Accept iff α ≤ 3ε/4.
bool accepts(double alpha, double eps);

// Exact nearest k-monotone table by exhaustive enumeration; throws BudgetError
// rather than approximate when the domain is too large.
Projector exact_projector(int k, const Budget& budget = {});

// Low-degree learner with the k-monotone Fourier cutoff and the default sample
// size for confidence 1 − delta.
TableLearner kmono_table_learner(int k, double delta = 1.0 / 6.0, double c = 1.0);

// Testing by learning: learn h to error ε/4, project to g, estimate d(f, g) on
// fresh examples and accept iff α ≤ 3ε/4.
TestVerdict test_by_learning(const OracleConfig& cfg, int k, double eps, const TableLearner& learner,
                             const Projector& projector);

// Longest alternating chain among the distinct sampled points.
AlternatingChain longest_sample_chain(std::span<const LabeledExample> sample, const Domain& domain);

// Rejects iff the sample itself contains a (k+1)-alternating chain, returned
// as the witness. Never rejects a k-monotone function.
TestVerdict one_sided_test(std::span<const LabeledExample> sample, const Domain& domain, int k, int r);

// P[x ⪯ y] for independent uniform x, y ∈ {0,1}^d, i.e. (3/4)^d.
Fraction comparable_pair_probability(int d);

}  // namespace kmono
