#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "corona/expr/graph.hpp"

namespace corona::models {

/// Bundle state: E surface gradient (kV/cm), n subconductor count, d
/// subconductor diameter (cm). n is real so that models can be swept.
struct Bundle {
  double E = 0.0;
  double n = 1.0;
  double d = 0.0;
};

enum class Quantity { AudibleNoise, RadioInterference };

enum class Family { Discovered, Baseline, Empirical, SymbolicBaseline };

enum class ModelId {
  AnDiscovered3,
  AnDiscovered4,
  AnDiscovered5,
  AnPolyBaseline,
  AnBpa,
  AnEnel,
  AnIreq,
  AnFgh,
  AnGe,
  AnEpri,
  AnPysr,
  AnDso,
  RiDiscovered3,
  RiDiscovered4,
  RiDiscovered5,
  RiPolyBaseline,
  RiBpa,
  RiCigre,
  RiEpri,
  RiCispr,
  RiIreq,
  RiPysr,
  RiDso,
};

struct CatalogEntry {
  ModelId id;
  std::string_view key;  // stable CLI id, e.g. "an-discovered-3"
  Quantity quantity;
  Family family;
  std::size_t terms;
  bool piecewise;
  std::string_view source;
  std::string_view formula;
};

std::span<const CatalogEntry> model_catalog() noexcept;
const CatalogEntry& catalog_entry(ModelId id) noexcept;
std::optional<ModelId> find_model(std::string_view key) noexcept;
/// Throws Error(InvalidInput) listing the known keys.
ModelId parse_model_id(std::string_view key);
std::string_view to_string(ModelId id) noexcept;

enum class Reference { MicroWattPerMeter, PicoWattPerMeter };

struct NoiseLevel {
  double value = 0.0;
  Reference reference = Reference::MicroWattPerMeter;
};

/// Exact +-60 dB shift between the two power references.
NoiseLevel convert_reference(NoiseLevel level, Reference to) noexcept;

/// Audible-noise generation level, dB re 1 uW/m. Throws Error(Domain) when
/// the bundle leaves a formula's domain (log of a non-positive argument,
/// zero denominator) and Error(InvalidInput) for an RI model.
NoiseLevel an_level(ModelId model, const Bundle& bundle);

/// Radio-interference excitation function, dB. Same errors as an_level.
double ri_excitation(ModelId model, const Bundle& bundle);

/// Dispatches on the model's quantity; AN values are in uW/m.
double evaluate_model(ModelId model, const Bundle& bundle);

/// Graph form of the discovered laws and polynomial baselines, with the
/// published coefficients on the root edges. Empty for other models.
std::optional<expr::ExprGraph> model_graph(ModelId model);

/// Propagation coefficient in the ground-level audible-noise formula:
/// 11.4 for discovered laws, 10 otherwise.
double default_an_propagation_coefficient(ModelId model) noexcept;

}  // namespace corona::models
