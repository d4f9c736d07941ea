// kmono: batch front end for the k-monotonicity library.
//
//   kmono check --table f.json --k 2
//   kmono learn --target dictator --d 8 --eta 0.25 --noise --sweep 1000,5000 --out learn.csv
//   kmono test --mode two-sided --target majority --d 4 --eps 0.3 --trials 100
//   kmono talagrand distinguish --d 14 --eps 1 --sweep 1,2,4,8 --trials 2000 --out adv.csv
//
// Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmono/core.hpp"
#include "kmono/io.hpp"
#include "kmono/learners.hpp"
#include "kmono/lowerbound.hpp"
#include "kmono/parallel.hpp"
#include "kmono/testers.hpp"

namespace fs = std::filesystem;
using namespace kmono;

namespace {

struct Settings {
  int d = 4;
  int r = 2;
  int k = 1;
  int n = 2;  // grid side; 2 means the hypercube
  double eps = 0.3;
  double delta = 1.0 / 3.0;
  double eta = 0.0;
  bool noise = false;
  bool eta_given = false;
  std::size_t samples = 0;
  std::vector<std::size_t> sweep;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::uint64_t budget = Budget{}.enumeration;
  std::uint64_t sample_budget = Budget{}.samples;
  std::string out;
  std::string format;
  unsigned workers = 1;
  std::string config;

  std::string table;
  std::string target = "dictator";
  std::string learner = "lowdegree";
  std::string mode = "one-sided";
  std::optional<int> tau;
  std::string hypothesis_out;

  std::optional<int> width;
  std::vector<std::uint64_t> terms;
  std::size_t count = 1;
  std::string variant = "yes";
  std::string tester = "birthday";
  std::string input;

  Budget make_budget() const {
    Budget b;
    b.enumeration = budget;
    b.samples = sample_budget;
    return b;
  }
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Keys of the config file are the long flag names with '-' replaced by '_'.
void apply_config(Settings& s) {
  if (s.config.empty()) return;
  std::ifstream in(s.config);
  if (!in) throw UsageError("cannot open config file " + s.config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "d") s.d = v.get<int>();
      else if (key == "r") s.r = v.get<int>();
      else if (key == "k") s.k = v.get<int>();
      else if (key == "n") s.n = v.get<int>();
      else if (key == "eps") s.eps = v.get<double>();
      else if (key == "delta") s.delta = v.get<double>();
      else if (key == "eta") s.eta = v.get<double>(), s.eta_given = true;
      else if (key == "noise") s.noise = v.get<bool>();
      else if (key == "samples") s.samples = v.get<std::size_t>();
      else if (key == "sweep") s.sweep = v.get<std::vector<std::size_t>>();
      else if (key == "trials") s.trials = v.get<std::size_t>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "budget") s.budget = v.get<std::uint64_t>();
      else if (key == "sample_budget") s.sample_budget = v.get<std::uint64_t>();
      else if (key == "out") s.out = v.get<std::string>();
      else if (key == "format") s.format = v.get<std::string>();
      else if (key == "workers") s.workers = v.get<unsigned>();
      else if (key == "table") s.table = v.get<std::string>();
      else if (key == "target") s.target = v.get<std::string>();
      else if (key == "learner") s.learner = v.get<std::string>();
      else if (key == "mode") s.mode = v.get<std::string>();
      else if (key == "tau") s.tau = v.get<int>();
      else if (key == "width") s.width = v.get<int>();
      else if (key == "terms") s.terms = v.get<std::vector<std::uint64_t>>();
      else if (key == "count") s.count = v.get<std::size_t>();
      else if (key == "variant") s.variant = v.get<std::string>();
      else if (key == "tester") s.tester = v.get<std::string>();
      else if (key == "input") s.input = v.get<std::string>();
      else throw UsageError("config file: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError("config file: " + std::string(e.what()));
  }
}

// Canonical dump of everything that influences results.
json settings_json(const std::string& command, const Settings& s) {
  json j{{"command", command}, {"d", s.d},         {"r", s.r},           {"k", s.k},
         {"n", s.n},           {"eps", s.eps},     {"delta", s.delta},   {"eta", s.eta},
         {"noise", s.noise},   {"samples", s.samples}, {"sweep", s.sweep}, {"trials", s.trials},
         {"seed", s.seed},     {"budget", s.budget}, {"sample_budget", s.sample_budget},
         {"table", s.table},   {"target", s.target}, {"learner", s.learner}, {"mode", s.mode},
         {"terms", s.terms},   {"count", s.count}, {"variant", s.variant}, {"tester", s.tester},
         {"input", s.input}};
  j["tau"] = s.tau ? json(*s.tau) : json(nullptr);
  j["width"] = s.width ? json(*s.width) : json(nullptr);
  return j;
}

std::string config_hash(const std::string& command, const Settings& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : settings_json(command, s).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json meta(const std::string& command, const Settings& s) {
  return json{{"seed", s.seed}, {"config_hash", config_hash(command, s)}, {"version", KMONO_VERSION}};
}

std::string csv_preamble(const std::string& command, const Settings& s, const std::string& header) {
  return "# kmono " + std::string(KMONO_VERSION) + " seed=" + std::to_string(s.seed) +
         " config_hash=" + config_hash(command, s) + "\n" + header + "\n";
}

// Writes a whole artifact through a temporary file so a failure never leaves
// a partial file at the destination.
void write_atomic(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << body;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

// CSV rows appended to <out>.partial as they complete; a rerun with the same
// preamble skips the rows already there. finish() moves the file into place.
class RowSink {
 public:
  RowSink(std::string path, std::string preamble) : path_(std::move(path)), preamble_(std::move(preamble)) {
    if (path_.empty()) {
      std::cout << preamble_;
      return;
    }
    partial_ = path_ + ".partial";
    std::ifstream in(partial_, std::ios::binary);
    std::string kept;
    if (in) {
      std::stringstream buf;
      buf << in.rdbuf();
      const std::string text = buf.str();
      if (text.compare(0, preamble_.size(), preamble_) == 0) {
        // Keep only complete lines.
        const auto last_nl = text.rfind('\n');
        kept = text.substr(0, last_nl + 1);
        for (std::size_t i = preamble_.size(); i < kept.size(); ++i) done_ += kept[i] == '\n';
      }
    }
    file_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!file_) throw std::runtime_error("cannot write " + partial_);
    file_ << (kept.empty() ? preamble_ : kept);
    file_.flush();
    if (done_) std::clog << "resuming " << path_ << " after " << done_ << " completed rows\n";
  }

  std::size_t done() const noexcept { return done_; }

  void add(const std::string& row) {
    if (path_.empty()) {
      std::cout << row << '\n';
      return;
    }
    file_ << row << '\n';
    file_.flush();
  }

  void finish() {
    if (path_.empty()) return;
    file_.close();
    fs::rename(partial_, path_);
  }

 private:
  std::string path_;
  std::string preamble_;
  std::string partial_;
  std::ofstream file_;
  std::size_t done_ = 0;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// ---- validation ------------------------------------------------------------

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

void validate_common(const Settings& s) {
  require(s.d >= 1 && s.d <= 63, "--d must lie in [1, 63]");
  require(s.r >= 2 && s.r <= 256, "--r must lie in [2, 256]");
  require(s.k >= 1, "--k must be >= 1");
  require(s.n >= 2, "--n must be >= 2");
  require(s.eps > 0 && s.eps <= 1, "--eps must lie in (0, 1]");
  require(s.delta > 0 && s.delta < 1, "--delta must lie in (0, 1)");
  require(s.eta >= 0 && s.eta < 0.5, "--eta must lie in [0, 1/2)");
  require(s.trials >= 1, "--trials must be >= 1");
  require(s.workers >= 1, "--workers must be >= 1");
  require(s.format.empty() || s.format == "csv" || s.format == "json" || s.format == "text",
          "--format must be csv, json or text");
  if (s.noise) require(s.eta_given && s.eta > 0, "--noise needs a positive --eta");
  if (s.eta_given && s.eta > 0) require(s.r == 2, "label noise is only defined for r = 2");
}

Domain target_domain(const Settings& s) {
  return s.n == 2 ? Domain::hypercube(s.d) : Domain::hypergrid(s.d, s.n);
}

FunctionTable make_target(const Settings& s) {
  if (!s.table.empty()) return load_table(s.table);
  require(s.n == 2 ? s.d <= kMaxCubeDim : true, "--d exceeds 26 for an explicit target table");
  const Domain dom = target_domain(s);
  const int top = s.d * (s.n - 1);  // largest coordinate sum
  auto sum = [&](std::uint64_t x) {
    int total = 0;
    for (int c : dom.coords(x)) total += c;
    return total;
  };
  if (s.target == "dictator")
    return FunctionTable::tabulate(dom, 2, [&](std::uint64_t x) { return dom.coords(x)[0] * 2 >= s.n ? 1 : 0; });
  if (s.target == "majority")
    return FunctionTable::tabulate(dom, 2, [&](std::uint64_t x) { return 2 * sum(x) >= top ? 1 : 0; });
  if (s.target == "anti-majority")
    return FunctionTable::tabulate(dom, 2, [&](std::uint64_t x) { return 2 * sum(x) >= top ? 0 : 1; });
  if (s.target == "parity")
    return FunctionTable::tabulate(dom, 2, [&](std::uint64_t x) { return sum(x) & 1; });
  if (s.target == "staircase")
    return FunctionTable::tabulate(dom, s.r, [&](std::uint64_t x) { return sum(x) * s.r / (top + 1); });
  if (s.target == "random") {
    CounterRng rng(s.seed, 0x7461726765ULL);
    return FunctionTable::tabulate(dom, s.r, [&](std::uint64_t) { return static_cast<int>(rng.below(s.r)); });
  }
  throw UsageError("unknown --target '" + s.target +
                   "' (dictator, majority, anti-majority, parity, staircase, random)");
}

std::vector<std::size_t> sample_points(const Settings& s) {
  if (!s.sweep.empty()) return s.sweep;
  require(s.samples > 0, "give --samples or --sweep");
  return {s.samples};
}

TalagrandParams make_params(const Settings& s) {
  TalagrandParams::Overrides o;
  o.width = s.width;
  if (!s.terms.empty()) o.terms_per_block = s.terms;
  try {
    return TalagrandParams::make(s.d, s.r, s.k, s.eps, o);
  } catch (const BudgetError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---- commands --------------------------------------------------------------

int cmd_check(const Settings& s) {
  require(!s.table.empty(), "check needs --table");
  FunctionTable f = [&] {
    try {
      return load_table(s.table);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }();
  validate_common(s);
  const Budget budget = s.make_budget();
  const auto chain = find_longest_alternating_chain(f, budget);
  const bool mono = static_cast<int>(chain.size()) <= s.k;
  json report{{"k", s.k}, {"k_monotone", mono}, {"longest_chain", chain.size()}, {"chain", to_json(chain)}};
  try {
    const Fraction dist = mono ? Fraction(0) : exact_distance_to_k_monotone(f, s.k, budget);
    report["distance"] = dist.to_string();
    report["distance_value"] = dist.to_double();
  } catch (const BudgetError& e) {
    report["distance"] = nullptr;
    report["distance_note"] = e.what();
    // Disjoint chains of length 3k still give a lower bound.
    try {
      const auto family = greedy_disjoint_chains(f, 3 * s.k, budget);
      report["distance_lower_bound"] = chain_lower_bound(f, family, s.k).to_string();
    } catch (const BudgetError&) {
    }
  }
  report["meta"] = meta("check", s);

  if (s.format == "json" || (!s.out.empty() && s.format.empty())) {
    write_atomic(s.out, report.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "k-monotone: " << (mono ? "true" : "false") << "\n";
    os << "longest alternating chain: " << chain.size() << "\n";
    if (report["distance"].is_null())
      os << "distance: not computed (" << report["distance_note"].get<std::string>() << ")\n";
    if (report.contains("distance_lower_bound"))
      os << "distance lower bound: " << report["distance_lower_bound"].get<std::string>() << "\n";
    else
      os << "distance: " << report["distance"].get<std::string>() << "\n";
    write_atomic(s.out, os.str());
  }
  return 0;
}

int cmd_learn(const Settings& s) {
  validate_common(s);
  require(s.learner == "lowdegree" || s.learner == "coupon" || s.learner == "threshold",
          "--learner must be lowdegree, coupon or threshold");
  const FunctionTable f = make_target(s);
  const auto points = sample_points(s);
  if (s.learner == "lowdegree") {
    require(f.domain().kind == DomainKind::hypercube && f.r() == 2, "lowdegree needs a Boolean hypercube target");
  } else if (s.learner == "coupon") {
    require(f.r() == 2, "coupon needs a Boolean target; use --learner threshold for r > 2");
  } else {
    require(s.eta == 0, "threshold composition needs noiseless labels");
  }
  if (s.eta > 0) require(s.noise, "--eta > 0 given without --noise");
  const int tau = s.tau ? *s.tau : kmono_degree_cutoff(s.k, f.d(), s.eps);
  require(tau >= 0, "--tau must be >= 0");
  const std::string format = s.format.empty() ? "csv" : s.format;
  require(format != "text", "learn writes csv or json");

  struct Row {
    std::size_t s;
    std::size_t trial;
    double error;
    Hypothesis h;
  };
  auto run = [&](std::size_t samples, std::size_t trial) {
    OracleConfig cfg = uniform_oracle(f, s.noise ? s.eta : 0.0, derive_key(s.seed, trial));
    cfg.stream = samples;
    Hypothesis h;
    if (s.learner == "lowdegree")
      h = low_degree_learn(cfg, tau, samples);
    else if (s.learner == "coupon")
      h = coupon_learn(cfg, samples);
    else
      h = threshold_compose_learn(
          cfg, [samples](const OracleConfig& sub, double, double) -> BooleanHypothesis { return coupon_learn(sub, samples); },
          s.eps, s.delta);
    const double err = exact_error(h, f);
    return Row{samples, trial, err, std::move(h)};
  };

  if (format == "json") {
    json rows = json::array();
    std::optional<Hypothesis> last;
    for (auto samples : points)
      for (std::size_t t = 0; t < s.trials; ++t) {
        Row row = run(samples, t);
        rows.push_back({{"samples", row.s}, {"trial", row.trial}, {"error", row.error}});
        last = std::move(row.h);
      }
    json out{{"meta", meta("learn", s)}, {"learner", s.learner}, {"tau", tau}, {"rows", rows}};
    if (last) out["hypothesis"] = to_json(*last);
    write_atomic(s.out, out.dump(2) + "\n");
    return 0;
  }

  RowSink sink(s.out, csv_preamble("learn", s, "samples,trial,tau,error"));
  std::size_t index = 0;
  std::optional<Hypothesis> last;
  for (auto samples : points)
    for (std::size_t t = 0; t < s.trials; ++t, ++index) {
      if (index < sink.done()) continue;
      Row row = run(samples, t);
      sink.add(std::to_string(row.s) + "," + std::to_string(t) + "," +
               (s.learner == "lowdegree" ? std::to_string(std::min(tau, f.d())) : std::string("")) + "," +
               fmt(row.error));
      last = std::move(row.h);
    }
  sink.finish();
  if (!s.hypothesis_out.empty() && last) write_atomic(s.hypothesis_out, to_json(*last).dump() + "\n");
  return 0;
}

int cmd_test(const Settings& s) {
  validate_common(s);
  require(s.mode == "one-sided" || s.mode == "two-sided", "--mode must be one-sided or two-sided");
  const FunctionTable f = make_target(s);
  if (s.mode == "one-sided") {
    require(s.samples > 0, "one-sided testing needs --samples");
  } else {
    require(f.domain().kind == DomainKind::hypercube && f.r() == 2, "two-sided testing needs a Boolean hypercube target");
    require(s.eps < 1, "--eps must be < 1 for two-sided testing");
    const double log_count = static_cast<double>(f.size());
    if (log_count > std::log2(static_cast<double>(s.budget)))
      throw BudgetError("two-sided projection enumerates 2^" + std::to_string(f.size()) + " tables",
                        "budget=" + std::to_string(s.budget));
  }
  const std::string format = s.format.empty() ? "json" : s.format;
  require(format != "text", "test writes csv or json");
  const Budget budget = s.make_budget();

  std::vector<TestVerdict> verdicts(s.trials);
  const auto learner = kmono_table_learner(s.k);
  const auto projector = s.mode == "two-sided" ? exact_projector(s.k, budget) : Projector{};
  parallel_for(s.trials, s.workers, [&](std::size_t t) {
    OracleConfig cfg = uniform_oracle(f, s.noise ? s.eta : 0.0, derive_key(s.seed, t));
    if (s.mode == "one-sided") {
      const auto sample = draw(cfg, s.samples);
      verdicts[t] = one_sided_test(sample, f.domain(), s.k, f.r());
    } else {
      verdicts[t] = test_by_learning(cfg, s.k, s.eps, learner, projector);
    }
    verdicts[t].seed = cfg.seed;
  });
  std::size_t accepted = 0;
  for (const auto& v : verdicts) accepted += v.accepted();

  if (format == "json") {
    json list = json::array();
    for (const auto& v : verdicts) list.push_back(to_json(v));
    const double rate = static_cast<double>(accepted) / static_cast<double>(s.trials);
    json out{{"meta", meta("test", s)},   {"mode", s.mode},        {"trials", s.trials},
             {"accept_rate", rate},       {"reject_rate", 1 - rate}, {"verdicts", list}};
    write_atomic(s.out, out.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << csv_preamble("test", s, "trial,decision,alpha,samples_used,witness_length");
    for (std::size_t t = 0; t < verdicts.size(); ++t) {
      const auto& v = verdicts[t];
      os << t << ',' << (v.accepted() ? "accept" : "reject") << ',' << (v.alpha ? fmt(*v.alpha) : "") << ','
         << v.samples_used << ',' << (v.witness ? v.witness->size() : 0) << '\n';
    }
    write_atomic(s.out, os.str());
  }
  return 0;
}

std::vector<TalagrandInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    const json j = json::parse(in);
    const json& list = j.contains("instances") ? j.at("instances") : j;
    std::vector<TalagrandInstance> out;
    for (const auto& item : list) out.push_back(talagrand_from_json(item.contains("instance") ? item.at("instance") : item));
    return out;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

TalagrandInstance instance_for(const TalagrandParams& p, const Settings& s, std::size_t i, bool yes) {
  const std::uint64_t seed = derive_key(s.seed, i);
  return yes ? TalagrandInstance::sample_yes(p, seed) : TalagrandInstance::sample_no(p, seed);
}

int cmd_talagrand_gen(const Settings& s) {
  validate_common(s);
  require(s.variant == "yes" || s.variant == "no", "--variant must be yes or no");
  const auto p = make_params(s);
  json list = json::array();
  for (std::size_t i = 0; i < s.count; ++i)
    list.push_back({{"seed", derive_key(s.seed, i)}, {"instance", to_json(instance_for(p, s, i, s.variant == "yes"))}});
  write_atomic(s.out, json{{"meta", meta("talagrand gen", s)}, {"instances", list}}.dump() + "\n");
  return 0;
}

int cmd_talagrand_verify(const Settings& s) {
  validate_common(s);
  std::vector<TalagrandInstance> instances;
  if (!s.input.empty()) {
    instances = load_instances(s.input);
  } else {
    const auto p = make_params(s);
    for (std::size_t i = 0; i < s.count; ++i) instances.push_back(instance_for(p, s, i, true));
  }
  for (const auto& inst : instances)
    if (inst.params().d > s.make_budget().max_chain_dim)
      throw BudgetError("verify materializes 2^d points", "max_chain_dim=" + std::to_string(s.make_budget().max_chain_dim));
  std::vector<std::uint8_t> ok(instances.size());
  std::vector<std::uint8_t> yes(instances.size());
  parallel_for(instances.size(), s.workers, [&](std::size_t i) {
    yes[i] = instances[i].is_yes();
    ok[i] = is_k_monotone(instances[i].materialize(), instances[i].params().k);
  });
  std::size_t passed = 0, yes_count = 0;
  std::ostringstream os;
  os << csv_preamble("talagrand verify", s, "index,variant,k_monotone");
  for (std::size_t i = 0; i < ok.size(); ++i) {
    os << i << ',' << (yes[i] ? "yes" : "no") << ',' << (ok[i] ? "true" : "false") << '\n';
    if (yes[i]) {
      ++yes_count;
      passed += ok[i];
    }
  }
  write_atomic(s.out, os.str());
  std::clog << "verified " << passed << "/" << yes_count << " yes-instances k-monotone\n";
  return passed == yes_count ? 0 : 4;
}

int cmd_talagrand_farness(const Settings& s) {
  validate_common(s);
  require(s.variant == "yes" || s.variant == "no", "--variant must be yes or no");
  const auto p = make_params(s);
  require(p.d <= s.make_budget().max_chain_dim, "farness needs d <= 20");
  RowSink sink(s.out, csv_preamble("talagrand farness", s, "index,seed,variant,method,distance,value,chains,chain_length"));
  const Budget budget = s.make_budget();
  const std::size_t batch = std::max<std::size_t>(1, s.workers);
  for (std::size_t start = sink.done(); start < s.count; start += batch) {
    const std::size_t len = std::min(batch, s.count - start);
    std::vector<FarnessReport> reps(len);
    parallel_for(len, s.workers, [&](std::size_t j) {
      reps[j] = farness_report(instance_for(p, s, start + j, s.variant == "yes"), budget);
    });
    for (std::size_t j = 0; j < len; ++j)
      sink.add(std::to_string(start + j) + "," + std::to_string(derive_key(s.seed, start + j)) + "," + s.variant + "," +
               to_string(reps[j].method) + "," + reps[j].distance.to_string() + "," + fmt(reps[j].distance.to_double()) +
               "," + std::to_string(reps[j].chains) + "," + std::to_string(reps[j].chain_length));
  }
  sink.finish();
  return 0;
}

int cmd_talagrand_distinguish(const Settings& s) {
  validate_common(s);
  require(s.tester == "birthday" || s.tester == "always-accept", "--tester must be birthday or always-accept");
  const auto p = make_params(s);
  const auto points = sample_points(s);
  const SampleTester tester = s.tester == "birthday" ? SampleTester(birthday_distinguisher) : SampleTester(always_accept);
  std::ostringstream header;
  write_distinguish_csv_header(header);
  std::string h = header.str();
  h.pop_back();
  RowSink sink(s.out, csv_preamble("talagrand distinguish", s, h));
  for (std::size_t i = sink.done(); i < points.size(); ++i) {
    const auto res = distinguishing_experiment(p, tester, points[i], s.trials, derive_key(s.seed, points[i]), s.workers);
    std::ostringstream row;
    write_distinguish_csv_row(row, res);
    std::string line = row.str();
    line.pop_back();
    sink.add(line);
  }
  sink.finish();
  return 0;
}

void add_shared(CLI::App* app, Settings& s) {
  app->add_option("--d", s.d, "dimension");
  app->add_option("--r", s.r, "number of output values");
  app->add_option("--k", s.k, "alternation bound");
  app->add_option("--n", s.n, "hypergrid side (2 = hypercube)");
  app->add_option("--eps", s.eps, "accuracy / farness parameter");
  app->add_option("--delta", s.delta, "failure probability");
  app->add_option("--eta", s.eta, "label noise rate")->each([&s](const std::string&) { s.eta_given = true; });
  app->add_flag("--noise", s.noise, "corrupt labels at rate --eta");
  app->add_option("--samples", s.samples, "sample count");
  app->add_option("--sweep", s.sweep, "comma separated sample counts")->delimiter(',');
  app->add_option("--trials", s.trials, "independent trials");
  app->add_option("--seed", s.seed, "master seed");
  app->add_option("--budget", s.budget, "enumeration budget (candidate tables)");
  app->add_option("--sample-budget", s.sample_budget, "largest sample count a formula may return");
  app->add_option("--out", s.out, "output file (default stdout)");
  app->add_option("--format", s.format, "csv | json | text");
  app->add_option("--workers", s.workers, "worker threads");
  app->add_option("--config", s.config, "JSON file whose keys override flags");
}

void add_target(CLI::App* app, Settings& s) {
  app->add_option("--table", s.table, "target table file (JSON or KMFT binary)");
  app->add_option("--target", s.target, "built-in target: dictator, majority, anti-majority, parity, staircase, random");
}

void add_talagrand(CLI::App* app, Settings& s) {
  app->add_option("--width", s.width, "term width w");
  app->add_option("--terms", s.terms, "terms per block N_i")->delimiter(',');
  app->add_option("--count", s.count, "number of instances");
  app->add_option("--variant", s.variant, "yes | no");
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  if (const char* env = std::getenv("KMONO_BUDGET")) {
    try {
      s.budget = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: KMONO_BUDGET is not an integer\n";
      return 2;
    }
  }

  CLI::App app{"k-monotone function checking, learning, testing and hard instances"};
  app.set_version_flag("--version", KMONO_VERSION);
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "k-monotonicity report for a table");
  add_shared(check, s);
  check->add_option("--table", s.table, "table file (JSON or KMFT binary)")->required();

  auto* learn = app.add_subcommand("learn", "run a learner and report its exact error");
  add_shared(learn, s);
  add_target(learn, s);
  learn->add_option("--learner", s.learner, "lowdegree | coupon | threshold");
  learn->add_option("--tau", s.tau, "degree cutoff (default ceil(k sqrt(d)/eps))");
  learn->add_option("--hypothesis", s.hypothesis_out, "write the last hypothesis as JSON");

  auto* test = app.add_subcommand("test", "sample-based testing over many trials");
  add_shared(test, s);
  add_target(test, s);
  test->add_option("--mode", s.mode, "one-sided | two-sided");

  auto* tal = app.add_subcommand("talagrand", "random Talagrand DNF instances");
  tal->require_subcommand(1);
  auto* gen = tal->add_subcommand("gen", "sample instances to JSON");
  auto* verify = tal->add_subcommand("verify", "exact k-monotonicity of yes-instances");
  auto* farness = tal->add_subcommand("farness", "distance to k-monotonicity per instance");
  auto* distinguish = tal->add_subcommand("distinguish", "yes/no distinguishing experiment");
  for (auto* sub : {gen, verify, farness, distinguish}) {
    add_shared(sub, s);
    add_talagrand(sub, s);
  }
  verify->add_option("--in", s.input, "instances file from 'talagrand gen'");
  distinguish->add_option("--tester", s.tester, "birthday | always-accept");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    apply_config(s);
    if (*check) return cmd_check(s);
    if (*learn) return cmd_learn(s);
    if (*test) return cmd_test(s);
    if (*gen) return cmd_talagrand_gen(s);
    if (*verify) return cmd_talagrand_verify(s);
    if (*farness) return cmd_talagrand_farness(s);
    if (*distinguish) return cmd_talagrand_distinguish(s);
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
