#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kmono/errors.hpp"
#include "kmono/fraction.hpp"

namespace kmono {

// Hypercube points are bit masks: bit i is coordinate i. Hypergrid points are
// mixed-radix indices with coordinate 0 least significant. Under either
// encoding increasing index order is a linear extension of the partial order.
using Mask = std::uint64_t;

inline constexpr int kMaxCubeDim = 26;

enum class DomainKind { hypercube, hypergrid };

struct Domain {
  DomainKind kind = DomainKind::hypercube;
  int d = 0;
  int n = 2;  // side length; always 2 for the hypercube

  static Domain hypercube(int d);
  static Domain hypergrid(int d, int n);

  std::uint64_t size() const;
  // Index stride of coordinate i.
  std::uint64_t stride(int i) const;
  std::vector<int> coords(std::uint64_t index) const;
  std::uint64_t index(std::span<const int> coords) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

// x ⪯ y in {0,1}^d.
constexpr bool cube_leq(Mask x, Mask y) noexcept { return (x & y) == x; }

inline int weight(Mask x) noexcept { return std::popcount(x); }

struct CubePoint {
  Mask bits = 0;
  int d = 0;
};

struct GridPoint {
  std::vector<int> coords;
  int n = 2;
};

// Coordinatewise order test x ⪯ y. Throws std::invalid_argument on a
// dimension (or side length) mismatch.
bool precedes(const CubePoint& x, const CubePoint& y);
bool precedes(const GridPoint& x, const GridPoint& y);
// Same test on raw indices of a domain.
bool precedes(const Domain& domain, std::uint64_t x, std::uint64_t y);

// Explicit [r]-valued function on a hypercube or hypergrid. Immutable.
class FunctionTable {
 public:
  FunctionTable(Domain domain, int r, std::vector<std::uint8_t> values);

  template <typename F>
  static FunctionTable tabulate(Domain domain, int r, F&& f) {
    std::vector<std::uint8_t> values(domain.size());
    for (std::uint64_t x = 0; x < values.size(); ++x) values[x] = static_cast<std::uint8_t>(f(x));
    return FunctionTable(domain, r, std::move(values));
  }
  static FunctionTable constant(Domain domain, int r, int value);

  const Domain& domain() const noexcept { return domain_; }
  int d() const noexcept { return domain_.d; }
  int r() const noexcept { return r_; }
  std::uint64_t size() const noexcept { return values_.size(); }
  int operator[](std::uint64_t x) const noexcept { return values_[x]; }
  int at(std::uint64_t x) const;
  std::span<const std::uint8_t> values() const noexcept { return values_; }

  friend bool operator==(const FunctionTable&, const FunctionTable&) = default;

 private:
  Domain domain_;
  int r_;
  std::vector<std::uint8_t> values_;
};

// Points x_1 ≺ ... ≺ x_m whose values decrease on odd steps and increase on
// even steps (the first step is a decrease).
struct AlternatingChain {
  std::vector<std::uint64_t> points;
  std::vector<int> values;

  std::size_t size() const noexcept { return points.size(); }
};

// Empty string if `chain` is an alternating chain for f, else the reason.
std::string chain_violation(const FunctionTable& f, const AlternatingChain& chain);

// Builds the chain through the given points, reading values from f.
AlternatingChain make_chain(const FunctionTable& f, std::vector<std::uint64_t> points);

struct DisjointChainFamily {
  std::vector<AlternatingChain> chains;

  std::size_t covered() const noexcept;
};

// Length of the longest alternating chain of f. Requires f on the hypercube
// with d ≤ budget.max_chain_dim, or a hypergrid of comparable size.
int longest_alternating_chain(const FunctionTable& f, const Budget& budget = {});

// A longest alternating chain, ties broken towards smaller indices.
AlternatingChain find_longest_alternating_chain(const FunctionTable& f, const Budget& budget = {});

bool is_k_monotone(const FunctionTable& f, int k, const Budget& budget = {});

Fraction hamming_distance(const FunctionTable& f, const FunctionTable& g);

// Every k-monotone [r]-valued function on a small domain, enumerated
// exhaustively. Throws BudgetError when r^|domain| exceeds budget.enumeration.
class KMonotoneSet {
 public:
  KMonotoneSet(Domain domain, int r, int k, const Budget& budget = {});

  std::size_t count() const noexcept { return count_; }
  FunctionTable member(std::size_t i) const;
  // Minimal normalized Hamming distance from f to the set.
  Fraction distance(const FunctionTable& f) const;
  // A nearest member; ties go to the member enumerated first.
  FunctionTable nearest(const FunctionTable& f) const;

 private:
  std::size_t nearest_index(const FunctionTable& f, std::uint64_t* mismatches) const;

  Domain domain_;
  int r_;
  int k_;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> members_;  // count_ × |domain|, row major
};

Fraction exact_distance_to_k_monotone(const FunctionTable& f, int k, const Budget& budget = {});

// max(|∪C| / (3|X|), ((k'-k)/2)·|C| / |X|). Throws InvalidChainFamily naming the
// offending chain if a chain is not alternating for f, lengths differ,
// k' < 3k or chains intersect.
Fraction chain_lower_bound(const FunctionTable& f, const DisjointChainFamily& family, int k);

// Vertex-disjoint alternating chains of length exactly `length`, found greedily
// by repeated longest-chain extraction. Never claims maximality.
DisjointChainFamily greedy_disjoint_chains(const FunctionTable& f, int length, const Budget& budget = {});

}  // namespace kmono
