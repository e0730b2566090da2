#include "corona/models/catalog.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "corona/error.hpp"
#include "corona/expr/build.hpp"

namespace corona::models {

namespace {

using enum ModelId;
using Q = Quantity;
using F = Family;

constexpr std::array<CatalogEntry, 23> kCatalog{{
    {AnDiscovered3, "an-discovered-3", Q::AudibleNoise, F::Discovered, 3, false, "discovered law, three terms",
     "0.0878*E*n + 72.3*log10(d) - 648.7/(E*log10(E))"},
    {AnDiscovered4, "an-discovered-4", Q::AudibleNoise, F::Discovered, 4, false, "discovered law, four terms",
     "0.093*E*n + 55.02*log10(d) - 591/(E*d^2) - 5448/E^2"},
    {AnDiscovered5, "an-discovered-5", Q::AudibleNoise, F::Discovered, 5, false, "discovered law, five terms",
     "0.0116*n^2*d - 102.4*n/(E*ln(E) + d^2) + 9.216*d + 19.13*ln(n) - 677.3/E"},
    {AnPolyBaseline, "an-poly-baseline", Q::AudibleNoise, F::Baseline, 4, false,
     "polynomial-type regression baseline", "1.022*n + 10.4*d + 30.839 - 933.633/E"},
    {AnBpa, "an-bpa", Q::AudibleNoise, F::Empirical, 4, false, "empirical, BPA",
     "120*log10(E) + 55*log10(d) + 26.4*log10(n) - 128.4"},
    {AnEnel, "an-enel", Q::AudibleNoise, F::Empirical, 4, false, "empirical, ENEL",
     "85*log10(E) + 45*log10(d) + 18*log10(n) - 71"},
    {AnIreq, "an-ireq", Q::AudibleNoise, F::Empirical, 4, false, "empirical, IREQ",
     "72*log10(E) + 45.81*log10(d) + 22.71*log10(n) - 57.6"},
    {AnFgh, "an-fgh", Q::AudibleNoise, F::Empirical, 4, false, "empirical, FGH",
     "2*E + 45*log10(d) + 18*log10(n) - 0.3"},
    {AnGe, "an-ge", Q::AudibleNoise, F::Empirical, 4, false, "empirical, GE",
     "-655/E + 44*log10(d) + 20*log10(n) + 67.9"},
    {AnEpri, "an-epri", Q::AudibleNoise, F::Empirical, 4, false, "empirical, EPRI",
     "120*log10(E) + 54*log10(d) + 24.8*log10(n) - 126"},
    {AnPysr, "an-pysr", Q::AudibleNoise, F::SymbolicBaseline, 4, false, "symbolic-regression baseline, PySR",
     "1.58*n*d - 2.97*n + 55.6 - 915/E"},
    {AnDso, "an-dso", Q::AudibleNoise, F::SymbolicBaseline, 5, false, "symbolic-regression baseline, DSO",
     "-2.65*E*d/n^2 + 62.8*d - 64.8*d/log10(E) + 0.47*n - 17"},
    {RiDiscovered3, "ri-discovered-3", Q::RadioInterference, F::Discovered, 3, false,
     "discovered law, three terms", "45.6*log10(E) - 819.5/(d*(E - 1)) + 0.07*n*d^2"},
    {RiDiscovered4, "ri-discovered-4", Q::RadioInterference, F::Discovered, 4, false,
     "discovered law, four terms", "-117.2*n/(n^2*d - d) - 133.5*n/(E + n*d^2) + 98.68 - 629.7/E"},
    {RiDiscovered5, "ri-discovered-5", Q::RadioInterference, F::Discovered, 5, false,
     "discovered law, five terms", "-45.87*E/(n^3*d) + 4.499*d + 72.88 - 522.2/E - 543.4/(E*d)"},
    {RiPolyBaseline, "ri-poly-baseline", Q::RadioInterference, F::Baseline, 4, false,
     "polynomial-type regression baseline", "6.51*d + 10.287*log10(n) + 55.22 - 671.7/E"},
    {RiBpa, "ri-bpa", Q::RadioInterference, F::Empirical, 3, false, "empirical, BPA",
     "120*log10(E/15) + 40*log10(d/4) + 37.02"},
    {RiCigre, "ri-cigre", Q::RadioInterference, F::Empirical, 3, false, "empirical, CIGRE", "3.5*E + 6*d - 40.69"},
    {RiEpri, "ri-epri", Q::RadioInterference, F::Empirical, 3, true, "empirical, EPRI",
     "-580/E + 38*log10(d/3.8) + (81.1 if n <= 8 else 86.1)"},
    {RiCispr, "ri-cispr", Q::RadioInterference, F::Empirical, 4, false, "empirical, CISPR",
     "70 - 580/E + 35*log10(d) - 10*log10(n)"},
    {RiIreq, "ri-ireq", Q::RadioInterference, F::Empirical, 4, true, "empirical, IREQ",
     "-90.25 + 92.42*log10(E) + 43.03*log10(d) - K(n), K = 0, 3.7, 6 for n = 1, 2, >= 3"},
    {RiPysr, "ri-pysr", Q::RadioInterference, F::SymbolicBaseline, 2, false, "symbolic-regression baseline, PySR",
     "0.51*(d + 158.407)*ln(ln((n - 6.35)*E)) - 613"},
    {RiDso, "ri-dso", Q::RadioInterference, F::SymbolicBaseline, 5, false, "symbolic-regression baseline, DSO",
     "11.1*E/n + 18.2*d - 68.6*d/n + 0.99*n - 16.1"},
}};

[[noreturn]] void domain(const char* what) { throw Error(ErrorKind::Domain, what); }

double lg(double x) {
  if (!(x > 0.0)) domain("log of a non-positive argument");
  return std::log10(x);
}

double ln(double x) {
  if (!(x > 0.0)) domain("log of a non-positive argument");
  return std::log(x);
}

double over(double num, double den) {
  if (den == 0.0 || !std::isfinite(den)) domain("zero denominator");
  return num / den;
}

void check_bundle(const Bundle& b) {
  if (!(b.E > 0.0) || !std::isfinite(b.E)) domain("surface gradient E must be positive");
  if (!(b.n >= 1.0) || !std::isfinite(b.n)) domain("subconductor count n must be at least 1");
  if (!(b.d > 0.0) || !std::isfinite(b.d)) domain("subconductor diameter d must be positive");
}

double ireq_k(double n) {
  const double k = std::round(n);
  if (k <= 1.0) return 0.0;
  if (k == 2.0) return 3.7;
  return 6.0;
}

double closed_form(ModelId id, const Bundle& b) {
  const double E = b.E, n = b.n, d = b.d;
  switch (id) {
    case AnDiscovered3: return 0.0878 * E * n + 72.3 * lg(d) - over(648.7, E * lg(E));
    case AnDiscovered4: return 0.093 * E * n + 55.02 * lg(d) - over(591.0, E * d * d) - over(5448.0, E * E);
    case AnDiscovered5:
      return 0.0116 * n * n * d - over(102.4 * n, E * ln(E) + d * d) + 9.216 * d + 19.13 * ln(n) -
             over(677.3, E);
    case AnPolyBaseline: return 1.022 * n + 10.4 * d + 30.839 - over(933.633, E);
    case AnBpa: return 120.0 * lg(E) + 55.0 * lg(d) + 26.4 * lg(n) - 128.4;
    case AnEnel: return 85.0 * lg(E) + 45.0 * lg(d) + 18.0 * lg(n) - 71.0;
    case AnIreq: return 72.0 * lg(E) + 45.81 * lg(d) + 22.71 * lg(n) - 57.6;
    case AnFgh: return 2.0 * E + 45.0 * lg(d) + 18.0 * lg(n) - 0.3;
    case AnGe: return -over(655.0, E) + 44.0 * lg(d) + 20.0 * lg(n) + 67.9;
    case AnEpri: return 120.0 * lg(E) + 54.0 * lg(d) + 24.8 * lg(n) - 126.0;
    case AnPysr: return 1.58 * n * d - 2.97 * n + 55.6 - over(915.0, E);
    case AnDso: return -2.65 * over(E * d, n * n) + 62.8 * d - over(64.8 * d, lg(E)) + 0.47 * n - 17.0;
    case RiDiscovered3: return 45.6 * lg(E) - over(819.5, d * (E - 1.0)) + 0.07 * n * d * d;
    case RiDiscovered4:
      return -over(117.2 * n, n * n * d - d) - over(133.5 * n, E + n * d * d) + 98.68 - over(629.7, E);
    case RiDiscovered5:
      return -over(45.87 * E, n * n * n * d) + 4.499 * d + 72.88 - over(522.2, E) - over(543.4, E * d);
    case RiPolyBaseline: return 6.51 * d + 10.287 * lg(n) + 55.22 - over(671.7, E);
    case RiBpa: return 120.0 * lg(E / 15.0) + 40.0 * lg(d / 4.0) + 37.02;
    case RiCigre: return 3.5 * E + 6.0 * d - 40.69;
    case RiEpri: return -over(580.0, E) + 38.0 * lg(d / 3.8) + (n <= 8.0 ? 81.1 : 86.1);
    case RiCispr: return 70.0 - over(580.0, E) + 35.0 * lg(d) - 10.0 * lg(n);
    case RiIreq: return -90.25 + 92.42 * lg(E) + 43.03 * lg(d) - ireq_k(n);
    case RiPysr: {
      if (!(n > 6.35)) domain("PySR radio-interference model needs n > 6.35");
      return 0.51 * (d + 158.407) * ln(ln((n - 6.35) * E)) - 613.0;
    }
    case RiDso: return 11.1 * over(E, n) + 18.2 * d - over(68.6 * d, n) + 0.99 * n - 16.1;
  }
  domain("unknown model");
}

double checked(ModelId id, const Bundle& b) {
  check_bundle(b);
  const double v = closed_form(id, b);
  if (!std::isfinite(v)) domain("model value is not finite");
  return v;
}

}  // namespace

std::span<const CatalogEntry> model_catalog() noexcept { return kCatalog; }

const CatalogEntry& catalog_entry(ModelId id) noexcept { return kCatalog[static_cast<std::size_t>(id)]; }

std::optional<ModelId> find_model(std::string_view key) noexcept {
  for (const auto& e : kCatalog) {
    if (e.key == key) return e.id;
  }
  return std::nullopt;
}

ModelId parse_model_id(std::string_view key) {
  if (auto id = find_model(key)) return *id;
  std::string known;
  for (const auto& e : kCatalog) {
    if (!known.empty()) known += ", ";
    known += e.key;
  }
  throw Error(ErrorKind::InvalidInput, "unknown model '" + std::string(key) + "' (known: " + known + ")");
}

std::string_view to_string(ModelId id) noexcept { return catalog_entry(id).key; }

NoiseLevel convert_reference(NoiseLevel level, Reference to) noexcept {
  if (level.reference == to) return level;
  const double shift = to == Reference::MicroWattPerMeter ? -60.0 : 60.0;
  return {level.value + shift, to};
}

NoiseLevel an_level(ModelId model, const Bundle& bundle) {
  if (catalog_entry(model).quantity != Quantity::AudibleNoise) {
    throw Error(ErrorKind::InvalidInput, std::string(to_string(model)) + " is not an audible-noise model");
  }
  return {checked(model, bundle), Reference::MicroWattPerMeter};
}

double ri_excitation(ModelId model, const Bundle& bundle) {
  if (catalog_entry(model).quantity != Quantity::RadioInterference) {
    throw Error(ErrorKind::InvalidInput, std::string(to_string(model)) + " is not a radio-interference model");
  }
  return checked(model, bundle);
}

double evaluate_model(ModelId model, const Bundle& bundle) { return checked(model, bundle); }

std::optional<expr::ExprGraph> model_graph(ModelId model) {
  using namespace corona::expr;
  const LogFactor log_E{{{"E", 1}}, 10.0};
  switch (model) {
    case AnDiscovered3:
      return sum_of({product_term(0.0878, {{"E", 1}, {"n", 1}}), log_term(72.3, {{{"d", 1}}, 10.0}),
                     rational_term(-648.7, {}, {{1.0, {{"E", 1}}, log_E}})});
    case AnDiscovered4:
      return sum_of({product_term(0.093, {{"E", 1}, {"n", 1}}), log_term(55.02, {{{"d", 1}}, 10.0}),
                     product_term(-591.0, {{"E", -1}, {"d", -2}}), product_term(-5448.0, {{"E", -2}})});
    case AnDiscovered5:
      return sum_of({product_term(0.0116, {{"n", 2}, {"d", 1}}),
                     rational_term(-102.4, {{"n", 1}},
                                   {{1.0, {{"E", 1}}, LogFactor{{{"E", 1}}, std::numbers::e}}, {1.0, {{"d", 2}}}}),
                     product_term(9.216, {{"d", 1}}), log_term(19.13, {{{"n", 1}}, std::numbers::e}),
                     product_term(-677.3, {{"E", -1}})});
    case AnPolyBaseline:
      return sum_of({product_term(1.022, {{"n", 1}}), product_term(10.4, {{"d", 1}}), constant_term(30.839),
                     product_term(-933.633, {{"E", -1}})});
    case RiDiscovered3:
      return sum_of({log_term(45.6, log_E),
                     rational_term(-819.5, {}, {{1.0, {{"d", 1}, {"E", 1}}}, {-1.0, {{"d", 1}}}}),
                     product_term(0.07, {{"n", 1}, {"d", 2}})});
    case RiDiscovered4:
      return sum_of({rational_term(-117.2, {{"n", 1}}, {{1.0, {{"n", 2}, {"d", 1}}}, {-1.0, {{"d", 1}}}}),
                     rational_term(-133.5, {{"n", 1}}, {{1.0, {{"E", 1}}}, {1.0, {{"n", 1}, {"d", 2}}}}),
                     constant_term(98.68), product_term(-629.7, {{"E", -1}})});
    case RiDiscovered5:
      return sum_of({product_term(-45.87, {{"E", 1}, {"n", -3}, {"d", -1}}), product_term(4.499, {{"d", 1}}),
                     constant_term(72.88), product_term(-522.2, {{"E", -1}}),
                     product_term(-543.4, {{"E", -1}, {"d", -1}})});
    case RiPolyBaseline:
      return sum_of({product_term(6.51, {{"d", 1}}), log_term(10.287, {{{"n", 1}}, 10.0}), constant_term(55.22),
                     product_term(-671.7, {{"E", -1}})});
    default: return std::nullopt;
  }
}

double default_an_propagation_coefficient(ModelId model) noexcept {
  return catalog_entry(model).family == Family::Discovered ? 11.4 : 10.0;
}

}  // namespace corona::models
