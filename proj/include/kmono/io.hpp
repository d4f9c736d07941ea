#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "kmono/core.hpp"
#include "kmono/downsample.hpp"
#include "kmono/learners.hpp"
#include "kmono/lowerbound.hpp"
#include "kmono/testers.hpp"

namespace kmono {

using json = nlohmann::json;

// {"d", "r", "domain_kind": "hypercube" | "hypergrid", "N" (grid only), "values"}
json to_json(const FunctionTable& f);
FunctionTable table_from_json(const json& j);

// Little-endian: "KMFT", u8 version (1), u8 kind (0 cube, 1 grid), u16 d, u32 N,
// u16 r, u64 count, then values packed LSB-first in ⌈log2 r⌉ bits each.
void write_table_binary(std::ostream& out, const FunctionTable& f);
FunctionTable read_table_binary(std::istream& in);

// Binary when the file starts with the magic, JSON otherwise.
FunctionTable load_table(const std::string& path);

json to_json(const AlternatingChain& chain);

// {"kind": "low_degree" | "majority" | "table" | "threshold", ...payload}
json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const json& j);

json to_json(const TestVerdict& v);

json to_json(const TalagrandParams& p);
TalagrandParams talagrand_params_from_json(const json& j);
// {"params", "terms", "variant": "yes" | "no", "phi" | "key"}
json to_json(const TalagrandInstance& inst);
TalagrandInstance talagrand_from_json(const json& j);

// {"d", "N", "breakpoints": [[...]] per coordinate, "representatives": [[...]]}
json to_json(const BlockMap& bm);
BlockMap block_map_from_json(const json& j);

// [{"law": "uniform", "a", "b"} | {"law": "exponential", "rate"} |
//  {"law": "gaussian", "mean", "sd"} | {"law": "empirical", "values"}, ...]
json to_json(const ProductMeasure& mu);
ProductMeasure measure_from_json(const json& j);

}  // namespace kmono
