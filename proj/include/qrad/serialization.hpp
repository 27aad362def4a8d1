#pragma once

#include <string>

#include "json.hpp"

#include "qrad/trajectory.hpp"

namespace qrad {

// Fields: breakpoints, segments (per segment 8 coefficient triples, ascending
// powers of the local time), v_in, v_out, classes, v0, anchor.
nlohmann::json trajectory_to_json(const Trajectory& tr);
Trajectory trajectory_from_json(const nlohmann::json& j);

// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string trajectory_hash(const Trajectory& tr);

Vec3 vec3_from_json(const nlohmann::json& j, const char* what);
nlohmann::json vec3_to_json(const Vec3& v);

}  // namespace qrad
