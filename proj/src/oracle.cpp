#include "kmono/oracle.hpp"

#include <stdexcept>

#include "kmono/errors.hpp"

namespace kmono {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

OracleConfig uniform_oracle(const FunctionTable& f, double eta, std::uint64_t seed) {
  OracleConfig cfg;
  cfg.r = f.r();
  if (f.domain().kind == DomainKind::hypercube)
    cfg.distribution = UniformCube{f.d()};
  else
    cfg.distribution = UniformGrid{f.d(), f.domain().n};
  cfg.target = f;
  cfg.eta = eta;
  cfg.seed = seed;
  return cfg;
}

int label_range(const OracleConfig& cfg) {
  if (const auto* table = std::get_if<FunctionTable>(&cfg.target)) return table->r();
  return cfg.r;
}

Domain oracle_domain(const OracleConfig& cfg) {
  return std::visit(overloaded{[](const UniformCube& u) { return Domain::hypercube(u.d); },
                               [](const UniformGrid& u) { return Domain::hypergrid(u.d, u.n); },
                               [](const CustomDistribution& c) { return c.domain; }},
                    cfg.distribution);
}

void validate(const OracleConfig& cfg) {
  if (!(cfg.eta >= 0.0 && cfg.eta < 0.5)) throw std::invalid_argument("noise rate eta must lie in [0, 1/2)");
  const int r = label_range(cfg);
  if (r < 2) throw std::invalid_argument("label range r must be >= 2");
  if (cfg.eta > 0.0 && r != 2)
    throw UnsupportedNoise("random classification noise is defined for Boolean labels only (r = 2)");
  const bool custom = std::holds_alternative<CustomDistribution>(cfg.distribution);
  if (std::holds_alternative<std::monostate>(cfg.target) && !custom)
    throw std::invalid_argument("oracle has no target function");
  if (const auto* table = std::get_if<FunctionTable>(&cfg.target); table && !custom) {
    if (table->domain() != oracle_domain(cfg)) throw std::invalid_argument("target table domain differs from the distribution");
  }
  if (const auto* c = std::get_if<CustomDistribution>(&cfg.distribution); c && !c->draw)
    throw std::invalid_argument("custom distribution without a sampler");
}

OracleConfig with_stream(OracleConfig cfg, std::uint64_t stream) {
  cfg.stream = stream;
  return cfg;
}

OracleConfig with_target(OracleConfig cfg, Target target, int r) {
  cfg.target = std::move(target);
  cfg.r = r;
  return cfg;
}

int evaluate_target(const OracleConfig& cfg, std::uint64_t x) {
  return std::visit(overloaded{[&](const FunctionTable& f) { return f.at(x); },
                               [&](const PointFunction& f) { return f(x); },
                               [](std::monostate) -> int { throw std::invalid_argument("oracle has no target function"); }},
                    cfg.target);
}

LabeledExample draw_one(const OracleConfig& cfg, std::uint64_t index) {
  CounterRng rng(derive_key(cfg.seed, cfg.stream), index);
  LabeledExample ex = std::visit(
      overloaded{[&](const UniformCube& u) {
                   const std::uint64_t mask = u.d == 64 ? ~0ULL : ((std::uint64_t{1} << u.d) - 1);
                   const std::uint64_t x = rng() & mask;
                   return LabeledExample{x, evaluate_target(cfg, x)};
                 },
                 [&](const UniformGrid& u) {
                   std::uint64_t x = 0;
                   std::uint64_t stride = 1;
                   for (int i = 0; i < u.d; ++i) {
                     x += rng.below(static_cast<std::uint64_t>(u.n)) * stride;
                     stride *= static_cast<std::uint64_t>(u.n);
                   }
                   return LabeledExample{x, evaluate_target(cfg, x)};
                 },
                 [&](const CustomDistribution& c) { return c.draw(rng); }},
      cfg.distribution);
  if (cfg.eta > 0.0 && rng.bernoulli(cfg.eta)) ex.label = 1 - ex.label;
  return ex;
}

std::vector<LabeledExample> draw_range(const OracleConfig& cfg, std::uint64_t first, std::size_t count) {
  validate(cfg);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_one(cfg, first + i));
  return out;
}

std::vector<LabeledExample> draw(const OracleConfig& cfg, std::size_t count) { return draw_range(cfg, 0, count); }

void write_examples_csv(std::ostream& out, const std::vector<LabeledExample>& examples) {
  out << "point,label\n";
  for (const auto& ex : examples) out << ex.point << ',' << ex.label << '\n';
}

}  // namespace kmono
