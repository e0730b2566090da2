#include "corona/propagation/audible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corona/error.hpp"

namespace corona::propagation {

double an_contribution(double generation_level, double coefficient, double distance) {
  if (!(distance > 0.0)) throw Error(ErrorKind::CoincidentPoint, "distance must be positive");
  return generation_level - coefficient * std::log10(distance) - 5.8;
}

double energy_sum(std::span<const double> levels) {
  // Factor out the largest level so large dB values do not overflow.
  double top = -std::numeric_limits<double>::infinity();
  for (double l : levels) top = std::max(top, l);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double l : levels) s += std::pow(10.0, (l - top) / 10.0);
  return top + 10.0 * std::log10(s);
}

ANPrediction an_ground_level(const LineGeometry& geometry, models::ModelId model,
                             std::optional<double> coefficient) {
  geometry.check();
  ANPrediction out;
  out.coefficient = coefficient.value_or(models::default_an_propagation_coefficient(model));
  for (std::size_t i = 0; i < geometry.phases.size(); ++i) {
    const auto& p = geometry.phases[i];
    const double l_an = p.an_level ? *p.an_level : models::an_level(model, p.bundle).value;
    const double r = phase_distance(geometry, i);
    out.generation.push_back(l_an);
    out.distances.push_back(r);
    out.contributions.push_back(an_contribution(l_an, out.coefficient, r));
  }
  out.total = energy_sum(out.contributions);
  return out;
}

}  // namespace corona::propagation
