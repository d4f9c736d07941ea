#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace kmono {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Derives an independent key from a parent key and a stream label.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream) noexcept {
  return mix64(key ^ mix64(stream + kGolden));
}

// Counter-based pseudo-random function: the word at `counter` of stream (key, stream).
constexpr std::uint64_t prf(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) noexcept {
  return mix64(derive_key(key, stream) + (counter + 1) * kGolden);
}

// Random generator over one (key, stream) pair. Copies replay the same words, so
// a trial or an example can be regenerated from its coordinates alone.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : base_(derive_key(key, stream)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(base_ + (++counter_) * kGolden); }

  // Uniform on [0, n), unbiased (Lemire).
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  double exponential(double rate) noexcept { return -std::log1p(-uniform01()) / rate; }

  // Box-Muller; one normal per call.
  double normal(double mean = 0.0, double stddev = 1.0) noexcept {
    const double u = 1.0 - uniform01();
    const double v = uniform01();
    return mean + stddev * std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace kmono
