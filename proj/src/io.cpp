#include "kmono/io.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <stdexcept>

namespace kmono {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<char, 4> kMagic{'K', 'M', 'F', 'T'};

json domain_json(const Domain& d) {
  json j;
  j["d"] = d.d;
  j["domain_kind"] = d.kind == DomainKind::hypercube ? "hypercube" : "hypergrid";
  if (d.kind == DomainKind::hypergrid) j["N"] = d.n;
  return j;
}

Domain domain_from_json(const json& j) {
  const std::string kind = j.value("domain_kind", "hypercube");
  const int d = j.at("d").get<int>();
  if (kind == "hypercube") return Domain::hypercube(d);
  if (kind == "hypergrid") return Domain::hypergrid(d, j.at("N").get<int>());
  throw std::invalid_argument("unknown domain_kind '" + kind + "'");
}

template <typename T>
void put(std::ostream& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("table file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

int value_bits(int r) { return static_cast<int>(std::bit_width(static_cast<unsigned>(r - 1))); }

json boolean_json(const BooleanHypothesis& h) {
  return std::visit([](const auto& x) { return to_json(Hypothesis(x)); }, h);
}

BooleanHypothesis boolean_from_json(const json& j) {
  Hypothesis h = hypothesis_from_json(j);
  return std::visit(overloaded{[](ThresholdHypothesis&&) -> BooleanHypothesis {
                                 throw std::invalid_argument("threshold levels must be Boolean hypotheses");
                               },
                               [](auto&& x) -> BooleanHypothesis { return std::move(x); }},
                    std::move(h));
}

}  // namespace

json to_json(const FunctionTable& f) {
  json j = domain_json(f.domain());
  j["r"] = f.r();
  j["values"] = std::vector<int>(f.values().begin(), f.values().end());
  return j;
}

FunctionTable table_from_json(const json& j) {
  const Domain domain = domain_from_json(j);
  const int r = j.value("r", 2);
  const auto raw = j.at("values").get<std::vector<int>>();
  std::vector<std::uint8_t> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0 || raw[i] >= r)
      throw std::invalid_argument("value " + std::to_string(raw[i]) + " at index " + std::to_string(i) +
                                  " outside [0, r)");
    values[i] = static_cast<std::uint8_t>(raw[i]);
  }
  return FunctionTable(domain, r, std::move(values));
}

void write_table_binary(std::ostream& out, const FunctionTable& f) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint8_t>(out, 1);
  put<std::uint8_t>(out, f.domain().kind == DomainKind::hypercube ? 0 : 1);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(f.d()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.domain().n));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(f.r()));
  put<std::uint64_t>(out, f.size());
  const int bits = value_bits(f.r());
  std::uint8_t byte = 0;
  int used = 0;
  for (std::uint64_t x = 0; x < f.size(); ++x) {
    for (int b = 0; b < bits; ++b) {
      byte |= static_cast<std::uint8_t>(((f[x] >> b) & 1) << used);
      if (++used == 8) {
        out.put(static_cast<char>(byte));
        byte = 0;
        used = 0;
      }
    }
  }
  if (used) out.put(static_cast<char>(byte));
}

FunctionTable read_table_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a KMFT table file");
  const auto version = get<std::uint8_t>(in);
  if (version != 1) throw std::runtime_error("unsupported table file version " + std::to_string(version));
  const auto kind = get<std::uint8_t>(in);
  const auto d = get<std::uint16_t>(in);
  const auto n = get<std::uint32_t>(in);
  const auto r = get<std::uint16_t>(in);
  const auto count = get<std::uint64_t>(in);
  if (kind > 1) throw std::runtime_error("unknown domain kind in table file");
  const Domain domain = kind == 0 ? Domain::hypercube(d) : Domain::hypergrid(d, static_cast<int>(n));
  if (count != domain.size()) throw std::runtime_error("table file count does not match its domain");
  if (r < 2 || r > 256) throw std::runtime_error("table file has r outside [2, 256]");
  const int bits = value_bits(r);
  std::vector<std::uint8_t> values(count);
  int byte = 0, left = 0;
  for (auto& v : values) {
    int val = 0;
    for (int b = 0; b < bits; ++b) {
      if (left == 0) {
        byte = in.get();
        if (byte == std::char_traits<char>::eof()) throw std::runtime_error("table file truncated");
        left = 8;
      }
      val |= (byte & 1) << b;
      byte >>= 1;
      --left;
    }
    if (val >= r) throw std::runtime_error("table file holds a value outside [0, r)");
    v = static_cast<std::uint8_t>(val);
  }
  return FunctionTable(domain, r, std::move(values));
}

FunctionTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  if (binary) return read_table_binary(in);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  try {
    return table_from_json(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

json to_json(const AlternatingChain& chain) { return json{{"points", chain.points}, {"values", chain.values}}; }

json to_json(const Hypothesis& h) {
  return std::visit(
      overloaded{[](const LowDegreeHypothesis& ld) {
                   std::vector<double> coeffs(ld.coeffs.data(), ld.coeffs.data() + ld.coeffs.size());
                   return json{{"kind", "low_degree"}, {"d", ld.d},           {"tau", ld.tau},
                               {"eta", ld.eta},        {"samples", ld.samples}, {"masks", ld.masks},
                               {"sums", ld.sums},      {"coefficients", coeffs}};
                 },
                 [](const MajorityTable& m) {
                   json j{{"kind", "majority"}, {"plus", m.plus}, {"minus", m.minus}};
                   j["domain"] = domain_json(m.domain);
                   return j;
                 },
                 [](const FunctionTable& t) { return json{{"kind", "table"}, {"table", to_json(t)}}; },
                 [](const ThresholdHypothesis& th) {
                   json levels = json::array();
                   for (const auto& l : th.levels) levels.push_back(boolean_json(l));
                   return json{{"kind", "threshold"}, {"r", th.r}, {"levels", levels}};
                 }},
      h);
}

Hypothesis hypothesis_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "low_degree") {
    LowDegreeHypothesis h;
    h.d = j.at("d").get<int>();
    h.tau = j.at("tau").get<int>();
    h.eta = j.at("eta").get<double>();
    h.samples = j.at("samples").get<std::size_t>();
    h.masks = j.at("masks").get<std::vector<Mask>>();
    h.sums = j.at("sums").get<std::vector<std::int64_t>>();
    if (h.masks.size() != h.sums.size()) throw std::invalid_argument("low_degree: masks and sums differ in length");
    if (h.samples == 0 || !(h.eta >= 0 && h.eta < 0.5)) throw std::invalid_argument("low_degree: bad samples or eta");
    const double scale = 1.0 / (static_cast<double>(h.samples) * (1.0 - 2.0 * h.eta));
    h.coeffs.resize(static_cast<Eigen::Index>(h.sums.size()));
    for (std::size_t i = 0; i < h.sums.size(); ++i)
      h.coeffs[static_cast<Eigen::Index>(i)] = static_cast<double>(h.sums[i]) * scale;
    return h;
  }
  if (kind == "majority") {
    MajorityTable m(domain_from_json(j.at("domain")));
    m.plus = j.at("plus").get<std::vector<std::uint32_t>>();
    m.minus = j.at("minus").get<std::vector<std::uint32_t>>();
    if (m.plus.size() != m.domain.size() || m.minus.size() != m.domain.size())
      throw std::invalid_argument("majority: vote arrays do not match the domain");
    return m;
  }
  if (kind == "table") return table_from_json(j.at("table"));
  if (kind == "threshold") {
    ThresholdHypothesis th;
    th.r = j.at("r").get<int>();
    for (const auto& l : j.at("levels")) th.levels.push_back(boolean_from_json(l));
    if (static_cast<int>(th.levels.size()) != th.r - 1) throw std::invalid_argument("threshold: need r-1 levels");
    return th;
  }
  throw std::invalid_argument("unknown hypothesis kind '" + kind + "'");
}

json to_json(const TestVerdict& v) {
  json j{{"decision", v.accepted() ? "accept" : "reject"}, {"samples_used", v.samples_used}, {"seed", v.seed}};
  if (v.alpha) j["alpha"] = *v.alpha;
  if (v.witness) {
    j["witness_points"] = v.witness->points;
    j["witness_values"] = v.witness->values;
  }
  return j;
}

json to_json(const TalagrandParams& p) {
  return json{{"d", p.d},
              {"r", p.r},
              {"k", p.k},
              {"eps", p.eps},
              {"width", p.width},
              {"terms_per_block", p.terms_per_block},
              {"block_bounds", p.block_bounds}};
}

TalagrandParams talagrand_params_from_json(const json& j) {
  TalagrandParams p;
  p.d = j.at("d").get<int>();
  p.r = j.at("r").get<int>();
  p.k = j.at("k").get<int>();
  p.eps = j.at("eps").get<double>();
  p.width = j.at("width").get<int>();
  p.terms_per_block = j.at("terms_per_block").get<std::vector<std::uint64_t>>();
  p.block_bounds = j.at("block_bounds").get<std::vector<int>>();
  validate(p);
  return p;
}

json to_json(const TalagrandInstance& inst) {
  json j{{"params", to_json(inst.params())}, {"terms", inst.terms().terms}};
  if (const auto* yes = std::get_if<YesLabels>(&inst.labels())) {
    j["variant"] = "yes";
    json phi = json::array();
    for (const auto& row : yes->phi) phi.push_back(std::vector<int>(row.begin(), row.end()));
    j["phi"] = phi;
  } else {
    j["variant"] = "no";
    j["key"] = std::get<NoLabels>(inst.labels()).key;
  }
  return j;
}

TalagrandInstance talagrand_from_json(const json& j) {
  TalagrandParams p = talagrand_params_from_json(j.at("params"));
  TermSet terms{j.at("terms").get<std::vector<std::vector<Mask>>>()};
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "yes") {
    YesLabels yes;
    for (const auto& row : j.at("phi").get<std::vector<std::vector<int>>>()) {
      std::vector<std::uint8_t> r;
      for (int v : row) {
        if (v < 0 || v > 255) throw std::invalid_argument("phi value out of range");
        r.push_back(static_cast<std::uint8_t>(v));
      }
      yes.phi.push_back(std::move(r));
    }
    return TalagrandInstance(std::move(p), std::move(terms), std::move(yes));
  }
  if (variant == "no") return TalagrandInstance(std::move(p), std::move(terms), NoLabels{j.at("key").get<std::uint64_t>()});
  throw std::invalid_argument("unknown instance variant '" + variant + "'");
}

json to_json(const BlockMap& bm) {
  json breaks = json::array(), reps = json::array();
  for (int i = 0; i < bm.d(); ++i) {
    std::vector<double> b(static_cast<std::size_t>(bm.n() - 1)), r(static_cast<std::size_t>(bm.n()));
    for (int z = 0; z + 1 < bm.n(); ++z) b[static_cast<std::size_t>(z)] = bm.breakpoints()(i, z);
    for (int z = 0; z < bm.n(); ++z) r[static_cast<std::size_t>(z)] = bm.representatives()(i, z);
    breaks.push_back(b);
    reps.push_back(r);
  }
  return json{{"d", bm.d()}, {"N", bm.n()}, {"breakpoints", breaks}, {"representatives", reps}};
}

BlockMap block_map_from_json(const json& j) {
  const int d = j.at("d").get<int>();
  const int n = j.at("N").get<int>();
  const auto b = j.at("breakpoints").get<std::vector<std::vector<double>>>();
  const auto r = j.at("representatives").get<std::vector<std::vector<double>>>();
  if (d < 1 || n < 1 || static_cast<int>(b.size()) != d || static_cast<int>(r.size()) != d)
    throw std::invalid_argument("block map: need d rows of breakpoints and representatives");
  Eigen::MatrixXd breaks(d, n - 1), reps(d, n);
  for (int i = 0; i < d; ++i) {
    const auto& bi = b[static_cast<std::size_t>(i)];
    const auto& ri = r[static_cast<std::size_t>(i)];
    if (static_cast<int>(bi.size()) != n - 1 || static_cast<int>(ri.size()) != n)
      throw std::invalid_argument("block map: row " + std::to_string(i) + " has the wrong length");
    for (int z = 0; z + 1 < n; ++z) breaks(i, z) = bi[static_cast<std::size_t>(z)];
    for (int z = 0; z < n; ++z) reps(i, z) = ri[static_cast<std::size_t>(z)];
  }
  return BlockMap(n, std::move(breaks), std::move(reps));
}

json to_json(const ProductMeasure& mu) {
  json out = json::array();
  for (const auto& law : mu.coords)
    out.push_back(std::visit(
        overloaded{[](const UniformLaw& u) { return json{{"law", "uniform"}, {"a", u.a}, {"b", u.b}}; },
                   [](const ExponentialLaw& e) { return json{{"law", "exponential"}, {"rate", e.rate}}; },
                   [](const GaussianLaw& g) { return json{{"law", "gaussian"}, {"mean", g.mean}, {"sd", g.sd}}; },
                   [](const EmpiricalLaw& e) { return json{{"law", "empirical"}, {"values", e.values}}; }},
        law));
  return out;
}

ProductMeasure measure_from_json(const json& j) {
  ProductMeasure mu;
  for (const auto& c : j) {
    const std::string law = c.at("law").get<std::string>();
    if (law == "uniform")
      mu.coords.emplace_back(UniformLaw{c.value("a", 0.0), c.value("b", 1.0)});
    else if (law == "exponential")
      mu.coords.emplace_back(ExponentialLaw{c.value("rate", 1.0)});
    else if (law == "gaussian")
      mu.coords.emplace_back(GaussianLaw{c.value("mean", 0.0), c.value("sd", 1.0)});
    else if (law == "empirical")
      mu.coords.emplace_back(EmpiricalLaw{c.at("values").get<std::vector<double>>()});
    else
      throw std::invalid_argument("unknown coordinate law '" + law + "'");
  }
  validate(mu);
  return mu;
}

}  // namespace kmono
