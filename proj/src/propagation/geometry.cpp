#include "corona/propagation/geometry.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "corona/error.hpp"

namespace corona::propagation {

using nlohmann::json;

void LineGeometry::check() const {
  if (phases.empty()) throw Error(ErrorKind::Geometry, "geometry needs at least one phase");
  if (!(mic.h >= 0.0) || !std::isfinite(mic.h)) throw Error(ErrorKind::Geometry, "measurement height must be >= 0");
  if (!std::isfinite(mic.x)) throw Error(ErrorKind::Geometry, "measurement offset must be finite");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& p = phases[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.h)) {
      throw Error(ErrorKind::Geometry, "phase " + std::to_string(i) + " has a non-finite position");
    }
    if (!(p.h > mic.h)) {
      throw Error(ErrorKind::Geometry, "phase " + std::to_string(i) + " must be above the measurement point");
    }
  }
}

double phase_distance(const LineGeometry& geometry, std::size_t phase) {
  if (phase >= geometry.phases.size()) throw Error(ErrorKind::InvalidInput, "phase index out of range");
  const auto& p = geometry.phases[phase];
  const double r = std::hypot(geometry.mic.x - p.x, geometry.mic.h - p.h);
  if (!(r >= kMinDistance)) {
    throw Error(ErrorKind::CoincidentPoint, "measurement point is within 0.1 m of phase " + std::to_string(phase));
  }
  return r;
}

double equivalent_radius(const Phase& phase) {
  const double n = std::round(phase.bundle.n);
  const double r = phase.bundle.d / 200.0;  // cm diameter to m radius
  if (!(r > 0.0)) throw Error(ErrorKind::Geometry, "subconductor diameter must be positive");
  if (phase.bundle_radius) {
    const double rb = *phase.bundle_radius;
    if (!(rb > r)) throw Error(ErrorKind::Geometry, "bundle_radius must exceed the subconductor radius");
    if (n <= 1.0) return r;
    return rb * std::pow(n * r / rb, 1.0 / n);
  }
  if (phase.r_sub) {
    if (!(*phase.r_sub > 0.0)) throw Error(ErrorKind::Geometry, "r_sub must be positive");
    return *phase.r_sub;
  }
  if (n <= 1.0) return r;
  throw Error(ErrorKind::Geometry, "a bundle needs bundle_radius or r_sub");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::InvalidInput, "unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::InvalidInput, std::string("missing '") + key + "' in " + where);
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::InvalidInput, std::string("'") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return number(j, key, where);
}

}  // namespace

LineGeometry geometry_from_json(const json& j) {
  reject_unknown(j, {"phases", "mic", "f_ri", "rho"}, "geometry");
  LineGeometry g;
  if (!j.contains("phases") || !j.at("phases").is_array()) {
    throw Error(ErrorKind::InvalidInput, "geometry needs a 'phases' array");
  }
  std::size_t i = 0;
  for (const auto& pj : j.at("phases")) {
    const auto where = "phases[" + std::to_string(i++) + "]";
    reject_unknown(pj, {"x", "h", "E", "n", "d", "r_sub", "bundle_radius", "an_level", "rief"}, where);
    Phase p;
    p.x = number(pj, "x", where);
    p.h = number(pj, "h", where);
    p.bundle = {number(pj, "E", where), number(pj, "n", where), number(pj, "d", where)};
    p.r_sub = optional_number(pj, "r_sub", where);
    p.bundle_radius = optional_number(pj, "bundle_radius", where);
    p.an_level = optional_number(pj, "an_level", where);
    p.rief = optional_number(pj, "rief", where);
    g.phases.push_back(p);
  }
  if (j.contains("mic")) {
    const auto& m = j.at("mic");
    reject_unknown(m, {"x", "h"}, "mic");
    g.mic.x = optional_number(m, "x", "mic").value_or(0.0);
    g.mic.h = optional_number(m, "h", "mic").value_or(kDefaultMicHeight);
  }
  g.f_ri = optional_number(j, "f_ri", "geometry").value_or(kDefaultFrequency);
  g.rho = optional_number(j, "rho", "geometry").value_or(kDefaultEarthResistivity);
  if (!(g.f_ri > 0.0)) throw Error(ErrorKind::InvalidInput, "f_ri must be positive");
  if (!(g.rho > 0.0)) throw Error(ErrorKind::InvalidInput, "rho must be positive");
  g.check();
  return g;
}

LineGeometry read_geometry_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open geometry file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
  }
  return geometry_from_json(j);
}

json to_json(const LineGeometry& g) {
  json phases = json::array();
  for (const auto& p : g.phases) {
    json pj{{"x", p.x}, {"h", p.h}, {"E", p.bundle.E}, {"n", p.bundle.n}, {"d", p.bundle.d}};
    if (p.r_sub) pj["r_sub"] = *p.r_sub;
    if (p.bundle_radius) pj["bundle_radius"] = *p.bundle_radius;
    if (p.an_level) pj["an_level"] = *p.an_level;
    if (p.rief) pj["rief"] = *p.rief;
    phases.push_back(pj);
  }
  return {{"phases", phases}, {"mic", {{"x", g.mic.x}, {"h", g.mic.h}}}, {"f_ri", g.f_ri}, {"rho", g.rho}};
}

}  // namespace corona::propagation
