#include "qrad/serialization.hpp"

#include <cstdint>

#include <fmt/format.h>

namespace qrad {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError(fmt::format("'{}' must be an array of three numbers", what));
  }
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) {
      throw ValidationError(fmt::format("'{}' must be an array of three numbers", what));
    }
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

json trajectory_to_json(const Trajectory& tr) {
  const auto& d = tr.data();
  json segs = json::array();
  for (const auto& seg : d.segments) {
    json coeffs = json::array();
    for (const auto& c : seg.c) coeffs.push_back(vec3_to_json(c));
    segs.push_back(coeffs);
  }
  json classes = json::array();
  for (auto c : d.classes) classes.push_back(to_string(c));
  return {{"breakpoints", d.breakpoints}, {"segments", segs},     {"v_in", vec3_to_json(d.v_in)},
          {"v_out", vec3_to_json(d.v_out)}, {"classes", classes}, {"v0", d.v0},
          {"anchor", vec3_to_json(d.anchor)}};
}

Trajectory trajectory_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("trajectory document must be an object");
  for (const char* key : {"breakpoints", "segments", "v_in", "v_out", "classes", "v0"}) {
    if (!j.contains(key)) throw ValidationError(fmt::format("trajectory document lacks '{}'", key));
  }
  TrajectoryData d;
  try {
    d.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    for (const auto& seg : j.at("segments")) {
      if (!seg.is_array() || seg.size() > kMaxDegree + 1) {
        throw ValidationError("segment must list at most 8 coefficient triples");
      }
      VecPoly p;
      for (std::size_t k = 0; k < seg.size(); ++k) p.c[k] = vec3_from_json(seg[k], "segment coefficient");
      d.segments.push_back(p);
    }
    for (const auto& c : j.at("classes")) d.classes.push_back(smoothness_from_string(c.get<std::string>()));
    d.v0 = j.at("v0").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed trajectory document: {}", e.what()));
  }
  d.v_in = vec3_from_json(j.at("v_in"), "v_in");
  d.v_out = vec3_from_json(j.at("v_out"), "v_out");
  if (j.contains("anchor")) {
    d.anchor = vec3_from_json(j.at("anchor"), "anchor");
  } else if (!d.segments.empty()) {
    d.anchor = d.segments.front().c[0];
  }
  return Trajectory(std::move(d));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string trajectory_hash(const Trajectory& tr) { return fnv1a_hex(trajectory_to_json(tr).dump()); }

}  // namespace qrad
