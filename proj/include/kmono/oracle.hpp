#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "kmono/core.hpp"
#include "kmono/rng.hpp"

namespace kmono {

// A point with its (possibly corrupted) label in [r]. Boolean labels are 0/1;
// the ±1 view maps 1 ↦ +1 and 0 ↦ -1.
struct LabeledExample {
  std::uint64_t point = 0;
  int label = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct UniformCube {
  int d = 0;
};

struct UniformGrid {
  int d = 0;
  int n = 2;
};

// Arbitrary point distribution that also supplies the clean label, e.g. the
// pushforward of a product measure through a block map. Must be a pure
// function of the generator it is handed.
struct CustomDistribution {
  std::function<LabeledExample(CounterRng&)> draw;
  Domain domain;
};

using Distribution = std::variant<UniformCube, UniformGrid, CustomDistribution>;
using PointFunction = std::function<int(std::uint64_t)>;
// monostate: labels come from a CustomDistribution.
using Target = std::variant<std::monostate, FunctionTable, PointFunction>;

// EX(f, μ) when eta = 0, EX^η(f, μ) otherwise.
struct OracleConfig {
  Target target;
  Distribution distribution = UniformCube{};
  int r = 2;  // label range for callable targets; tables carry their own
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

OracleConfig uniform_oracle(const FunctionTable& f, double eta = 0.0, std::uint64_t seed = 0);

int label_range(const OracleConfig& cfg);
Domain oracle_domain(const OracleConfig& cfg);
// Throws std::invalid_argument for eta outside [0, 1/2) or a missing target,
// UnsupportedNoise for eta > 0 with r > 2.
void validate(const OracleConfig& cfg);

// Copy of cfg drawing from an independent stream.
OracleConfig with_stream(OracleConfig cfg, std::uint64_t stream);
OracleConfig with_target(OracleConfig cfg, Target target, int r);

// Example i is a pure function of (seed, stream, i): disjoint index ranges can be
// drawn concurrently and any prefix replays identically.
LabeledExample draw_one(const OracleConfig& cfg, std::uint64_t index);
std::vector<LabeledExample> draw_range(const OracleConfig& cfg, std::uint64_t first, std::size_t count);
std::vector<LabeledExample> draw(const OracleConfig& cfg, std::size_t count);

// Clean label f(x) of the configured target.
int evaluate_target(const OracleConfig& cfg, std::uint64_t x);

// CSV "point,label" with points as integers.
void write_examples_csv(std::ostream& out, const std::vector<LabeledExample>& examples);

}  // namespace kmono
