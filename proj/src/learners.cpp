#include "kmono/learners.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "kmono/errors.hpp"
#include "kmono/fourier.hpp"

namespace kmono {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int pm(int label) { return label ? 1 : -1; }

void require_boolean_cube(const OracleConfig& cfg, const char* who) {
  validate(cfg);
  if (label_range(cfg) != 2) throw std::invalid_argument(std::string(who) + ": target must be Boolean");
  if (oracle_domain(cfg).kind != DomainKind::hypercube)
    throw std::invalid_argument(std::string(who) + ": oracle must range over the hypercube");
}

std::uint64_t checked_ceil(double value, const Budget& budget, const std::string& what) {
  if (!std::isfinite(value) || value > static_cast<double>(budget.samples))
    throw BudgetError(what + " needs " + (std::isfinite(value) ? std::to_string(value) : std::string("infinitely many")) +
                          " samples",
                      "samples=" + std::to_string(budget.samples));
  return static_cast<std::uint64_t>(std::ceil(value));
}

}  // namespace

std::vector<Mask> masks_up_to_degree(int d, int tau) {
  if (d < 0 || d > kMaxCubeDim) throw std::invalid_argument("masks_up_to_degree: d out of range");
  tau = std::clamp(tau, 0, d);
  std::vector<Mask> out;
  out.reserve(count_up_to_degree(d, tau));
  out.push_back(0);
  const Mask limit = Mask{1} << d;
  for (int w = 1; w <= tau; ++w) {
    // Gosper's hack: successive masks with w set bits in increasing order.
    for (Mask m = (Mask{1} << w) - 1; m < limit;) {
      out.push_back(m);
      const Mask c = m & (~m + 1);
      const Mask r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }
  return out;
}

std::uint64_t count_up_to_degree(int d, int tau) {
  tau = std::clamp(tau, 0, d);
  std::uint64_t total = 0, binom = 1;
  for (int i = 0; i <= tau; ++i) {
    total += binom;
    binom = binom * static_cast<std::uint64_t>(d - i) / static_cast<std::uint64_t>(i + 1);
  }
  return total;
}

double LowDegreeHypothesis::score(Mask x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) s += coeffs[static_cast<Eigen::Index>(i)] * chi(masks[i], x);
  return s;
}

int LowDegreeHypothesis::predict(Mask x) const {
  if (sums.size() != masks.size()) return score(x) >= 0.0 ? 1 : 0;
  std::int64_t s = 0;
  for (std::size_t i = 0; i < masks.size(); ++i) s += sums[i] * chi(masks[i], x);
  return s >= 0 ? 1 : 0;
}

FunctionTable LowDegreeHypothesis::to_table() const {
  const Domain domain = Domain::hypercube(d);
  if (masks.size() <= static_cast<std::size_t>(d) + 1)
    return FunctionTable::tabulate(domain, 2, [&](std::uint64_t x) { return predict(x); });
  if (sums.size() == masks.size()) {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> full = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(
        static_cast<Eigen::Index>(domain.size()));
    for (std::size_t i = 0; i < masks.size(); ++i) full[static_cast<Eigen::Index>(masks[i])] = sums[i];
    fwht_inplace(full);
    return FunctionTable::tabulate(domain, 2, [&](std::uint64_t x) { return full[static_cast<Eigen::Index>(x)] >= 0; });
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t i = 0; i < masks.size(); ++i) full[static_cast<Eigen::Index>(masks[i])] = coeffs[static_cast<Eigen::Index>(i)];
  fwht_inplace(full);
  return from_pm1(full, d);
}

MajorityTable::MajorityTable(Domain dom) : domain(dom), plus(dom.size(), 0), minus(dom.size(), 0) {}

FunctionTable MajorityTable::to_table() const {
  return FunctionTable::tabulate(domain, 2, [&](std::uint64_t x) { return predict(x); });
}

int predict(const BooleanHypothesis& h, std::uint64_t x) {
  return std::visit(overloaded{[&](const FunctionTable& t) { return t.at(x); }, [&](const auto& v) { return v.predict(x); }},
                    h);
}

int ThresholdHypothesis::predict(std::uint64_t x) const {
  int value = 0;
  for (std::size_t t = 0; t < levels.size(); ++t)
    if (kmono::predict(levels[t], x) == 1) value = static_cast<int>(t) + 1;
  return value;
}

int predict(const Hypothesis& h, std::uint64_t x) {
  return std::visit(overloaded{[&](const FunctionTable& t) { return t.at(x); }, [&](const auto& v) { return v.predict(x); }},
                    h);
}

FunctionTable tabulate(const Hypothesis& h, const Domain& domain, int r) {
  if (const auto* ld = std::get_if<LowDegreeHypothesis>(&h); ld && domain == Domain::hypercube(ld->d)) {
    return ld->to_table();
  }
  return FunctionTable::tabulate(domain, r, [&](std::uint64_t x) { return predict(h, x); });
}

double exact_error(const Hypothesis& h, const FunctionTable& f) {
  const FunctionTable table = tabulate(h, f.domain(), std::max(f.r(), 2));
  return hamming_distance(table, f).to_double();
}

LowDegreeHypothesis low_degree_learn(const OracleConfig& cfg, int tau, std::size_t s, EstimationRoute route) {
  require_boolean_cube(cfg, "low_degree_learn");
  if (s == 0) throw std::invalid_argument("low_degree_learn: sample count must be positive");
  const int d = oracle_domain(cfg).d;
  if (tau < 0) throw std::invalid_argument("low_degree_learn: tau must be non-negative");
  if (tau > d) {
    std::clog << "warning: low_degree_learn: tau " << tau << " exceeds d = " << d << ", clamped\n";
    tau = d;
  }

  LowDegreeHypothesis h;
  h.d = d;
  h.tau = tau;
  h.eta = cfg.eta;
  h.samples = s;
  h.masks = masks_up_to_degree(d, tau);
  h.sums.assign(h.masks.size(), 0);

  const auto examples = draw(cfg, s);
  const double direct_cost = static_cast<double>(s) * static_cast<double>(h.masks.size());
  const double transform_cost = std::ldexp(static_cast<double>(d + 1), d) + static_cast<double>(s);
  if (route == EstimationRoute::automatic)
    route = direct_cost <= transform_cost ? EstimationRoute::direct : EstimationRoute::transform;

  if (route == EstimationRoute::direct) {
    for (std::size_t i = 0; i < h.masks.size(); ++i) {
      std::int64_t acc = 0;
      for (const auto& ex : examples) acc += pm(ex.label) * chi(h.masks[i], ex.point);
      h.sums[i] = acc;
    }
  } else {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> hist =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(Eigen::Index{1} << d);
    for (const auto& ex : examples) hist[static_cast<Eigen::Index>(ex.point)] += pm(ex.label);
    fwht_inplace(hist);
    for (std::size_t i = 0; i < h.masks.size(); ++i) h.sums[i] = hist[static_cast<Eigen::Index>(h.masks[i])];
  }

  const double scale = 1.0 / (static_cast<double>(s) * (1.0 - 2.0 * cfg.eta));
  h.coeffs.resize(static_cast<Eigen::Index>(h.masks.size()));
  for (std::size_t i = 0; i < h.masks.size(); ++i)
    h.coeffs[static_cast<Eigen::Index>(i)] = static_cast<double>(h.sums[i]) * scale;
  return h;
}

std::uint64_t low_degree_sample_size(double eps, double delta, double eta, int d, int tau, double c,
                                     const Budget& budget) {
  if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1))
    throw std::invalid_argument("low_degree_sample_size: eps and delta must lie in (0, 1)");
  if (!(eta >= 0 && eta < 0.5)) throw std::invalid_argument("low_degree_sample_size: eta must lie in [0, 1/2)");
  if (!(c > 0)) throw std::invalid_argument("low_degree_sample_size: constant must be positive");
  const double margin = 1.0 - 2.0 * eta;
  const double per_coeff = 1.0 / (eps * eps * margin * margin) + std::log(1.0 / delta);
  const double value = c * per_coeff * static_cast<double>(count_up_to_degree(d, tau));
  return checked_ceil(value, budget, "low-degree learner");
}

int kmono_degree_cutoff(int k, int d, double eps) {
  if (k < 1 || !(eps > 0)) throw std::invalid_argument("kmono_degree_cutoff: need k >= 1 and eps > 0");
  const double raw = std::ceil(k * std::sqrt(static_cast<double>(d)) / eps);
  return raw >= d ? d : static_cast<int>(raw);
}

LowDegreeHypothesis kmono_learn_hypercube(const OracleConfig& cfg, int k, double eps, std::size_t s) {
  require_boolean_cube(cfg, "kmono_learn_hypercube");
  return low_degree_learn(cfg, kmono_degree_cutoff(k, oracle_domain(cfg).d, eps), s);
}

MajorityTable coupon_learn(const OracleConfig& cfg, std::size_t s) {
  validate(cfg);
  if (label_range(cfg) != 2) throw std::invalid_argument("coupon_learn: target must be Boolean");
  MajorityTable table(oracle_domain(cfg));
  for (std::size_t i = 0; i < s; ++i) {
    const auto ex = draw_one(cfg, i);
    if (ex.label)
      ++table.plus[ex.point];
    else
      ++table.minus[ex.point];
  }
  return table;
}

double majority_votes_needed(double eta, double beta) {
  if (!(eta >= 0 && eta < 0.5) || !(beta > 0 && beta < 1))
    throw std::invalid_argument("majority_votes_needed: need eta in [0, 1/2) and beta in (0, 1)");
  const double margin = 1.0 - 2.0 * eta;
  return 2.0 / (margin * margin) * std::log(2.0 / beta);
}

double coupon_sample_size_log(double eps, double delta, double eta, int n, int d) {
  if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1))
    throw std::invalid_argument("coupon_sample_size: eps and delta must lie in (0, 1)");
  if (!(eta >= 0 && eta < 0.5)) throw std::invalid_argument("coupon_sample_size: eta must lie in [0, 1/2)");
  if (n < 1 || d < 0) throw std::invalid_argument("coupon_sample_size: need N >= 1 and d >= 0");
  const double margin = 1.0 - 2.0 * eta;
  const double m = 2.0 / (margin * margin) * std::log(4.0 / (eps * delta));
  return std::log(m) + std::log(std::log(2.0 * m / delta)) + 2.0 * d * std::log(static_cast<double>(n));
}

std::uint64_t coupon_sample_size(double eps, double delta, double eta, int n, int d, const Budget& budget) {
  const double log_value = coupon_sample_size_log(eps, delta, eta, n, d);
  return checked_ceil(std::exp(log_value), budget, "coupon-collecting learner");
}

FunctionTable threshold_table(const FunctionTable& f, int t) {
  return FunctionTable::tabulate(f.domain(), 2, [&](std::uint64_t x) { return f[x] >= t ? 1 : 0; });
}

ThresholdHypothesis threshold_compose_learn(const OracleConfig& cfg, const BooleanLearner& base, double eps,
                                            double delta) {
  validate(cfg);
  if (cfg.eta != 0.0)
    throw UnsupportedNoise("threshold composition needs noiseless labels; noise is undefined for r > 2");
  if (!base) throw std::invalid_argument("threshold_compose_learn: no base learner");
  const int r = label_range(cfg);
  ThresholdHypothesis out;
  out.r = r;
  for (int t = 1; t < r; ++t) {
    OracleConfig sub = with_stream(cfg, derive_key(cfg.stream, static_cast<std::uint64_t>(t)));
    sub.r = 2;
    if (const auto* table = std::get_if<FunctionTable>(&cfg.target)) {
      sub.target = threshold_table(*table, t);
    } else if (std::holds_alternative<PointFunction>(cfg.target)) {
      sub.target = PointFunction([src = cfg, t](std::uint64_t x) { return evaluate_target(src, x) >= t ? 1 : 0; });
    }
    if (const auto* custom = std::get_if<CustomDistribution>(&cfg.distribution)) {
      sub.distribution = CustomDistribution{[draw = custom->draw, t](CounterRng& rng) {
                                              auto ex = draw(rng);
                                              ex.label = ex.label >= t ? 1 : 0;
                                              return ex;
                                            },
                                            custom->domain};
    }
    out.levels.push_back(base(sub, eps / r, delta / r));
  }
  return out;
}

}  // namespace kmono
