#include "kmono/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace kmono {

Domain Domain::hypercube(int d) {
  if (d < 0 || d > kMaxCubeDim) throw std::invalid_argument("hypercube dimension out of range [0, 26]");
  return Domain{DomainKind::hypercube, d, 2};
}

Domain Domain::hypergrid(int d, int n) {
  if (d < 0 || n < 1) throw std::invalid_argument("hypergrid needs d >= 0 and N >= 1");
  double log_size = d * std::log2(static_cast<double>(n));
  if (log_size > 40) throw std::invalid_argument("hypergrid [N]^d too large to index");
  return Domain{DomainKind::hypergrid, d, n};
}

std::uint64_t Domain::size() const {
  std::uint64_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::uint64_t>(n);
  return s;
}

std::uint64_t Domain::stride(int i) const {
  std::uint64_t s = 1;
  for (int j = 0; j < i; ++j) s *= static_cast<std::uint64_t>(n);
  return s;
}

std::vector<int> Domain::coords(std::uint64_t index) const {
  std::vector<int> c(d);
  for (int i = 0; i < d; ++i) {
    c[i] = static_cast<int>(index % n);
    index /= n;
  }
  return c;
}

std::uint64_t Domain::index(std::span<const int> c) const {
  if (static_cast<int>(c.size()) != d) throw std::invalid_argument("point dimension mismatch");
  std::uint64_t idx = 0;
  for (int i = d - 1; i >= 0; --i) {
    if (c[i] < 0 || c[i] >= n) throw std::invalid_argument("coordinate out of range");
    idx = idx * n + c[i];
  }
  return idx;
}

bool precedes(const CubePoint& x, const CubePoint& y) {
  if (x.d != y.d) throw std::invalid_argument("precedes: dimension mismatch");
  return cube_leq(x.bits, y.bits);
}

bool precedes(const GridPoint& x, const GridPoint& y) {
  if (x.coords.size() != y.coords.size() || x.n != y.n)
    throw std::invalid_argument("precedes: dimension mismatch");
  for (std::size_t i = 0; i < x.coords.size(); ++i)
    if (x.coords[i] > y.coords[i]) return false;
  return true;
}

bool precedes(const Domain& domain, std::uint64_t x, std::uint64_t y) {
  if (domain.kind == DomainKind::hypercube) return cube_leq(x, y);
  for (int i = 0; i < domain.d; ++i) {
    if (x % domain.n > y % domain.n) return false;
    x /= domain.n;
    y /= domain.n;
  }
  return true;
}

FunctionTable::FunctionTable(Domain domain, int r, std::vector<std::uint8_t> values)
    : domain_(domain), r_(r), values_(std::move(values)) {
  if (r_ < 2 || r_ > 256) throw std::invalid_argument("FunctionTable: r must lie in [2, 256]");
  if (values_.size() != domain_.size())
    throw std::invalid_argument("FunctionTable: expected " + std::to_string(domain_.size()) + " values, got " +
                                std::to_string(values_.size()));
  for (auto v : values_)
    if (v >= r_) throw std::invalid_argument("FunctionTable: value " + std::to_string(v) + " not below r");
}

FunctionTable FunctionTable::constant(Domain domain, int r, int value) {
  return FunctionTable(domain, r, std::vector<std::uint8_t>(domain.size(), static_cast<std::uint8_t>(value)));
}

int FunctionTable::at(std::uint64_t x) const {
  if (x >= values_.size()) throw std::out_of_range("FunctionTable::at");
  return values_[x];
}

std::size_t DisjointChainFamily::covered() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

AlternatingChain make_chain(const FunctionTable& f, std::vector<std::uint64_t> points) {
  AlternatingChain chain;
  chain.values.reserve(points.size());
  for (auto p : points) chain.values.push_back(f.at(p));
  chain.points = std::move(points);
  return chain;
}

std::string chain_violation(const FunctionTable& f, const AlternatingChain& chain) {
  if (chain.points.empty()) return "empty chain";
  if (chain.values.size() != chain.points.size()) return "values and points differ in length";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain.points[i] >= f.size()) return "point outside the domain";
    if (chain.values[i] != f[chain.points[i]]) return "recorded value disagrees with f";
  }
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const auto x = chain.points[i], y = chain.points[i + 1];
    if (x == y || !precedes(f.domain(), x, y)) return "points not strictly increasing at step " + std::to_string(i + 1);
    const int delta = f[y] - f[x];
    // Step i+1 (1-based) must decrease when odd and increase when even.
    const bool odd_step = (i % 2) == 0;
    if (odd_step && delta >= 0) return "step " + std::to_string(i + 1) + " does not decrease";
    if (!odd_step && delta <= 0) return "step " + std::to_string(i + 1) + " does not increase";
  }
  return {};
}

namespace {

// Longest alternating chain DP. A chain's length fixes the direction of its last
// step (even length: ended on a decrease), so per point we keep the longest odd-
// and even-length chains ending there, plus subset-maxima of both over all
// x ⪯ y grouped by f(x). Cost O(|X|·d·r).
class ChainDp {
 public:
  ChainDp(const Domain& domain, int r, std::span<const std::uint8_t> values, const std::vector<char>* excluded,
          const Budget& budget)
      : domain_(domain), r_(r), values_(values), excluded_(excluded) {
    const std::uint64_t size = values.size();
    const std::uint64_t max_size = std::uint64_t{1} << budget.max_chain_dim;
    if ((domain.kind == DomainKind::hypercube && domain.d > budget.max_chain_dim) || size > max_size)
      throw BudgetError("chain DP over " + std::to_string(size) + " points", "max_chain_dim=" +
                                                                               std::to_string(budget.max_chain_dim));
    if (size * static_cast<std::uint64_t>(r) > (std::uint64_t{1} << 28))
      throw BudgetError("chain DP table of " + std::to_string(size) + "x" + std::to_string(r) + " entries",
                        "dp_entries=2^28");
    strides_.resize(domain.d);
    for (int c = 0; c < domain.d; ++c) strides_[c] = domain.stride(c);
    odd_.assign(size, 0);
    even_.assign(size, 0);
    best_odd_.assign(size * r, 0);
    best_even_.assign(size * r, 0);
    run();
  }

  int longest() const {
    int best = 0;
    for (std::size_t y = 0; y < odd_.size(); ++y) best = std::max({best, int(odd_[y]), int(even_[y])});
    return best;
  }

  int length_at(std::uint64_t y) const { return std::max(odd_[y], even_[y]); }

  // The longest chain ending at y, points in increasing order.
  std::vector<std::uint64_t> reconstruct(std::uint64_t y) const {
    std::vector<std::uint64_t> rev{y};
    int length = length_at(y);
    std::uint64_t cur = y;
    while (length > 1) {
      const int fy = values_[cur];
      const int target = length - 1;
      const bool ended_on_decrease = (length % 2) == 0;
      const auto& table = ended_on_decrease ? best_odd_ : best_even_;
      const auto& own = ended_on_decrease ? odd_ : even_;
      int v = -1;
      if (ended_on_decrease) {
        for (int u = fy + 1; u < r_ && v < 0; ++u)
          if (table[cur * r_ + u] == target) v = u;
      } else {
        for (int u = 0; u < fy && v < 0; ++u)
          if (table[cur * r_ + u] == target) v = u;
      }
      cur = descend(cur, v, target, table, own);
      rev.push_back(cur);
      --length;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
  }

 private:
  bool excluded(std::uint64_t y) const { return excluded_ && (*excluded_)[y]; }

  int digit(std::uint64_t y, int c) const {
    return domain_.kind == DomainKind::hypercube ? int((y >> c) & 1) : int((y / strides_[c]) % domain_.n);
  }

  // Walks down from `from` to a point x ≺ from with f(x) = v and own[x] = target.
  std::uint64_t descend(std::uint64_t from, int v, int target, const std::vector<std::uint8_t>& table,
                        const std::vector<std::uint8_t>& own) const {
    std::uint64_t z = from;
    for (;;) {
      if (z != from && values_[z] == v && own[z] == target && !excluded(z)) return z;
      bool moved = false;
      for (int c = 0; c < domain_.d && !moved; ++c) {
        if (digit(z, c) == 0) continue;
        const std::uint64_t p = z - strides_[c];
        if (table[p * r_ + v] == target) {
          z = p;
          moved = true;
        }
      }
      if (!moved) throw std::logic_error("ChainDp: inconsistent tables during reconstruction");
    }
  }

  void run() {
    const std::uint64_t size = values_.size();
    const int d = domain_.d;
    std::vector<int> digits(d, 0);
    for (std::uint64_t y = 0; y < size; ++y) {
      std::uint8_t* bo = &best_odd_[y * r_];
      std::uint8_t* be = &best_even_[y * r_];
      for (int c = 0; c < d; ++c) {
        if (digits[c] == 0) continue;
        const std::uint64_t p = y - strides_[c];
        const std::uint8_t* po = &best_odd_[p * r_];
        const std::uint8_t* pe = &best_even_[p * r_];
        for (int v = 0; v < r_; ++v) {
          bo[v] = std::max(bo[v], po[v]);
          be[v] = std::max(be[v], pe[v]);
        }
      }
      if (!excluded(y)) {
        const int fy = values_[y];
        int even = 0;
        for (int v = fy + 1; v < r_; ++v)
          if (bo[v]) even = std::max(even, bo[v] + 1);
        int odd = 1;
        for (int v = 0; v < fy; ++v)
          if (be[v]) odd = std::max(odd, be[v] + 1);
        odd_[y] = static_cast<std::uint8_t>(odd);
        even_[y] = static_cast<std::uint8_t>(even);
        bo[fy] = std::max<std::uint8_t>(bo[fy], odd_[y]);
        be[fy] = std::max<std::uint8_t>(be[fy], even_[y]);
      }
      for (int c = 0; c < d; ++c) {
        if (++digits[c] < domain_.n) break;
        digits[c] = 0;
      }
    }
  }

  Domain domain_;
  int r_;
  std::span<const std::uint8_t> values_;
  const std::vector<char>* excluded_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint8_t> odd_, even_, best_odd_, best_even_;
};

}  // namespace

int longest_alternating_chain(const FunctionTable& f, const Budget& budget) {
  if (f.size() == 0) return 0;
  return ChainDp(f.domain(), f.r(), f.values(), nullptr, budget).longest();
}

AlternatingChain find_longest_alternating_chain(const FunctionTable& f, const Budget& budget) {
  if (f.size() == 0) return {};
  ChainDp dp(f.domain(), f.r(), f.values(), nullptr, budget);
  const int best = dp.longest();
  for (std::uint64_t y = 0; y < f.size(); ++y)
    if (dp.length_at(y) == best) return make_chain(f, dp.reconstruct(y));
  return {};
}

bool is_k_monotone(const FunctionTable& f, int k, const Budget& budget) {
  if (k < 1) throw std::invalid_argument("is_k_monotone: k must be >= 1");
  return longest_alternating_chain(f, budget) <= k;
}

Fraction hamming_distance(const FunctionTable& f, const FunctionTable& g) {
  if (f.domain() != g.domain()) throw std::invalid_argument("hamming_distance: domain mismatch");
  std::int64_t diff = 0;
  for (std::uint64_t x = 0; x < f.size(); ++x) diff += f[x] != g[x];
  return Fraction(diff, static_cast<std::int64_t>(f.size()));
}

KMonotoneSet::KMonotoneSet(Domain domain, int r, int k, const Budget& budget) : domain_(domain), r_(r), k_(k) {
  if (k < 1) throw std::invalid_argument("KMonotoneSet: k must be >= 1");
  if (r < 2) throw std::invalid_argument("KMonotoneSet: r must be >= 2");
  const std::uint64_t size = domain.size();
  const double log_count = static_cast<double>(size) * std::log2(static_cast<double>(r));
  const double log_budget = std::log2(static_cast<double>(std::max<std::uint64_t>(budget.enumeration, 1)));
  if (log_count > log_budget + 1e-9)
    throw BudgetError("enumerating " + std::to_string(r) + "^" + std::to_string(size) + " candidate functions",
                      "enumeration=" + std::to_string(budget.enumeration));
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < size; ++i) total *= static_cast<std::uint64_t>(r);

  std::vector<std::uint8_t> values(size, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    if (ChainDp(domain, r, values, nullptr, budget).longest() <= k) {
      members_.insert(members_.end(), values.begin(), values.end());
      ++count_;
    }
    for (std::uint64_t i = 0; i < size; ++i) {
      if (++values[i] < r) break;
      values[i] = 0;
    }
  }
}

FunctionTable KMonotoneSet::member(std::size_t i) const {
  const std::uint64_t size = domain_.size();
  auto first = members_.begin() + static_cast<std::ptrdiff_t>(i * size);
  return FunctionTable(domain_, r_, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(size)));
}

std::size_t KMonotoneSet::nearest_index(const FunctionTable& f, std::uint64_t* mismatches) const {
  if (f.domain() != domain_) throw std::invalid_argument("KMonotoneSet: domain mismatch");
  const std::uint64_t size = domain_.size();
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::size_t arg = 0;
  const auto fv = f.values();
  for (std::size_t i = 0; i < count_ && best > 0; ++i) {
    const std::uint8_t* g = &members_[i * size];
    std::uint64_t diff = 0;
    for (std::uint64_t x = 0; x < size && diff < best; ++x) diff += fv[x] != g[x];
    if (diff < best) {
      best = diff;
      arg = i;
    }
  }
  *mismatches = best;
  return arg;
}

Fraction KMonotoneSet::distance(const FunctionTable& f) const {
  std::uint64_t mismatches = 0;
  nearest_index(f, &mismatches);
  return Fraction(static_cast<std::int64_t>(mismatches), static_cast<std::int64_t>(domain_.size()));
}

FunctionTable KMonotoneSet::nearest(const FunctionTable& f) const {
  std::uint64_t mismatches = 0;
  return member(nearest_index(f, &mismatches));
}

Fraction exact_distance_to_k_monotone(const FunctionTable& f, int k, const Budget& budget) {
  if (is_k_monotone(f, k, budget)) return Fraction(0);
  return KMonotoneSet(f.domain(), std::max(f.r(), 2), k, budget).distance(f);
}

Fraction chain_lower_bound(const FunctionTable& f, const DisjointChainFamily& family, int k) {
  if (k < 1) throw std::invalid_argument("chain_lower_bound: k must be >= 1");
  if (family.chains.empty()) return Fraction(0);
  const std::size_t length = family.chains.front().size();
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < family.chains.size(); ++i) {
    const auto& chain = family.chains[i];
    if (chain.size() != length)
      throw InvalidChainFamily(i, "length " + std::to_string(chain.size()) + " differs from " + std::to_string(length));
    if (length < 3 * static_cast<std::size_t>(k))
      throw InvalidChainFamily(i, "chain length " + std::to_string(length) + " below 3k = " + std::to_string(3 * k));
    if (auto why = chain_violation(f, chain); !why.empty()) throw InvalidChainFamily(i, why);
    for (auto p : chain.points)
      if (!seen.insert(p).second) throw InvalidChainFamily(i, "shares point " + std::to_string(p) + " with another chain");
  }
  const auto size = static_cast<std::int64_t>(f.size());
  const auto chains = static_cast<std::int64_t>(family.chains.size());
  const Fraction union_bound(static_cast<std::int64_t>(family.covered()), 3 * size);
  const Fraction step_bound((static_cast<std::int64_t>(length) - k) * chains, 2 * size);
  return max(union_bound, step_bound);
}

DisjointChainFamily greedy_disjoint_chains(const FunctionTable& f, int length, const Budget& budget) {
  DisjointChainFamily family;
  if (length < 1 || f.size() == 0) return family;
  std::vector<char> used(f.size(), 0);
  for (;;) {
    ChainDp dp(f.domain(), f.r(), f.values(), &used, budget);
    std::vector<char> taken(f.size(), 0);
    bool any = false;
    for (std::uint64_t y = 0; y < f.size(); ++y) {
      if (used[y] || taken[y] || dp.length_at(y) < length) continue;
      auto points = dp.reconstruct(y);
      points.resize(static_cast<std::size_t>(length));
      if (std::any_of(points.begin(), points.end(), [&](auto p) { return taken[p] != 0; })) continue;
      for (auto p : points) taken[p] = 1;
      family.chains.push_back(make_chain(f, std::move(points)));
      any = true;
    }
    if (!any) break;
    for (std::uint64_t y = 0; y < f.size(); ++y) used[y] |= taken[y];
  }
  return family;
}

}  // namespace kmono
