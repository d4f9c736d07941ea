#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kmono {

// A computation would exceed a configured size budget. Never truncated silently.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::string budget_name)
      : std::runtime_error(what + " (budget: " + budget_name + ")"), budget_(std::move(budget_name)) {}
  const std::string& budget() const noexcept { return budget_; }

 private:
  std::string budget_;
};

// Random classification noise is only defined for Boolean labels.
class UnsupportedNoise : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A chain family handed to chain_lower_bound failed validation.
class InvalidChainFamily : public std::invalid_argument {
 public:
  InvalidChainFamily(std::size_t chain, const std::string& why)
      : std::invalid_argument("chain " + std::to_string(chain) + ": " + why), chain_(chain) {}
  std::size_t chain() const noexcept { return chain_; }

 private:
  std::size_t chain_;
};

struct Budget {
  // Maximum number of candidate functions r^(domain size) enumerated by exact distance.
  std::uint64_t enumeration = std::uint64_t{1} << 24;
  // Largest hypercube dimension handled by the full-table chain DP.
  int max_chain_dim = 20;
  // Largest sample count any sample-size formula may return.
  std::uint64_t samples = std::uint64_t{1} << 32;
};

}  // namespace kmono
