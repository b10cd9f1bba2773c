#pragma once

#include <json.hpp>

#include "dimest/bounds.hpp"
#include "dimest/manifolds.hpp"

namespace dimest::harness {

using json = nlohmann::json;

// Finite values as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
json number(double v);
double number_from(const json& j);

json to_json(const RegularityParams& reg);
json to_json(const T0Report& rep);
json to_json(const BoundReport& rep);
json to_json(const ManifoldSpec& spec);

// Accepts {"kind": "...", "d": .., "R": .., "r_minor": .., "cap_angle": .., "ambient_dim": ..,
// "profile": "generic"|"paper"}; missing fields fall back to per-kind defaults.
ManifoldSpec manifold_from_json(const json& j);

// 64-bit FNV-1a of a string, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace dimest::harness
