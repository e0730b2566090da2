#pragma once

#include <optional>
#include <span>
#include <vector>

#include "corona/models/catalog.hpp"
#include "corona/propagation/geometry.hpp"

namespace corona::propagation {

struct ANPrediction {
  std::vector<double> generation;     // L_AN per phase, dB(uW/m)
  std::vector<double> distances;      // R_i, m
  std::vector<double> contributions;  // L_p,i, dB(A)
  double total = 0.0;                 // L_p, dB(A)
  double coefficient = 0.0;           // C used for the spreading term
};

/// L_AN - C log10(R) - 5.8
double an_contribution(double generation_level, double coefficient, double distance);

/// 10 log10(sum 10^(L/10)); -inf entries contribute nothing.
double energy_sum(std::span<const double> levels);

/// Per-phase L_AN comes from the model unless the phase overrides it. The
/// coefficient defaults by model family (11.4 discovered, 10 otherwise).
ANPrediction an_ground_level(const LineGeometry& geometry, models::ModelId model,
                             std::optional<double> coefficient = std::nullopt);

}  // namespace corona::propagation
