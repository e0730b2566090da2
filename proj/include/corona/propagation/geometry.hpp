#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "corona/models/catalog.hpp"

namespace corona::propagation {

inline constexpr double kDefaultFrequency = 0.5e6;    // Hz
inline constexpr double kDefaultEarthResistivity = 100.0;  // ohm m
inline constexpr double kDefaultMicHeight = 1.5;      // m
inline constexpr double kMinDistance = 0.1;           // m

struct Phase {
  double x = 0.0;  // lateral offset, m
  double h = 0.0;  // height, m
  models::Bundle bundle;
  std::optional<double> bundle_radius;  // m, radius of the subconductor circle
  std::optional<double> r_sub;          // m, user-supplied equivalent radius
  std::optional<double> an_level;       // dB(uW/m), replaces the model value
  std::optional<double> rief;           // dB, replaces the model value
};

struct MeasurementPoint {
  double x = 0.0;
  double h = kDefaultMicHeight;
};

struct LineGeometry {
  std::vector<Phase> phases;
  MeasurementPoint mic;
  double f_ri = kDefaultFrequency;
  double rho = kDefaultEarthResistivity;

  /// Throws Error(Geometry) for an empty phase list, a phase at or below
  /// the measurement height, or a negative measurement height.
  void check() const;
};

/// Straight-line distance from the measurement point to a phase centre.
/// Throws Error(CoincidentPoint) below 0.1 m.
double phase_distance(const LineGeometry& geometry, std::size_t phase);

/// Equivalent single-conductor radius of a phase, m. A single conductor
/// uses d/2; a bundle uses R_b (n r / R_b)^(1/n) when bundle_radius is set,
/// otherwise r_sub. Throws Error(Geometry) when neither is available.
double equivalent_radius(const Phase& phase);

/// {phases:[{x, h, E, n, d, r_sub?, bundle_radius?, an_level?, rief?}],
///  mic:{x, h}, f_ri?, rho?}. Unknown keys are rejected with
/// Error(InvalidInput).
LineGeometry geometry_from_json(const nlohmann::json& j);
LineGeometry read_geometry_file(const std::filesystem::path& path);
nlohmann::json to_json(const LineGeometry& geometry);

}  // namespace corona::propagation
