#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "corona/dataset.hpp"
#include "corona/evolve/gp.hpp"
#include "corona/fit/objective.hpp"
#include "corona/models/catalog.hpp"

namespace corona::cli {

enum ExitCode : int { kOk = 0, kComputationFailure = 1, kInputError = 2 };

/// Parsed RunConfigFile. Monotonicity entries keep their optional fields
/// until a dataset is available to fill in defaults.
struct MonotonicityEntry {
  std::string var;
  int sign = +1;
  std::optional<std::pair<double, double>> domain;
  std::optional<std::size_t> grid;
};

struct RunConfig {
  evolve::GPConfig gp;
  std::vector<std::string> variables;  // empty: every non-target column
  std::optional<std::string> target;
  std::vector<MonotonicityEntry> monotonicity;
};

/// Schema-validated before use; unknown keys raise Error(InvalidInput).
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig read_run_config_file(const std::string& path);

/// Restricts the dataset to the configured variables and builds the specs
/// (dataset-derived defaults for missing domains, grids and nominals).
std::vector<fit::MonotonicitySpec> resolve_specs(const RunConfig& config, const Dataset& data);
Dataset select_variables(const Dataset& data, const std::vector<std::string>& variables);

struct BenchmarkRow {
  models::ModelId model;
  std::size_t used = 0;
  std::size_t excluded = 0;
  double rmse = 0.0;
  double mre = 0.0;
  std::vector<std::optional<double>> predictions;  // nullopt where excluded
};

/// RMSE = sqrt(mean(e^2)), MRE = mean(|e| / |y|) over rows where the model
/// is defined; rows raising Error(Domain) are excluded and counted. Rows
/// sorted by RMSE ascending (stable in the requested order).
std::vector<BenchmarkRow> benchmark(const Dataset& data, std::span<const models::ModelId> models);

double rmse(std::span<const double> target, std::span<const double> predicted);
double mre(std::span<const double> target, std::span<const double> predicted);

/// "45.277 dB": three decimals and a unit tag.
std::string format_level(double value, std::string_view unit);

/// Full command-line entry point. Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace corona::cli
