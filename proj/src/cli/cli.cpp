#include "corona/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "corona/error.hpp"
#include "corona/expr/eval.hpp"
#include "corona/expr/render.hpp"
#include "corona/propagation/audible.hpp"
#include "corona/propagation/geometry.hpp"
#include "corona/propagation/radio.hpp"

namespace corona::cli {

using nlohmann::json;
namespace fs = std::filesystem;

double rmse(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) throw Error(ErrorKind::InvalidInput, "length mismatch");
  if (target.empty()) throw Error(ErrorKind::EmptyDataset, "no rows");
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = predicted[i] - target[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(target.size()));
}

double mre(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) throw Error(ErrorKind::InvalidInput, "length mismatch");
  if (target.empty()) throw Error(ErrorKind::EmptyDataset, "no rows");
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) s += std::abs(predicted[i] - target[i]) / std::abs(target[i]);
  return s / static_cast<double>(target.size());
}

std::vector<BenchmarkRow> benchmark(const Dataset& data, std::span<const models::ModelId> ids) {
  if (!data.has_target()) throw Error(ErrorKind::InvalidInput, "benchmark needs a target column");
  if (data.rows() == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no rows");
  const auto E = data.column("E");
  const auto n = data.column("n");
  const auto d = data.column("d");
  const auto y = data.target();
  std::vector<BenchmarkRow> rows;
  for (const auto id : ids) {
    BenchmarkRow row;
    row.model = id;
    std::vector<double> t, p;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      try {
        const double v = models::evaluate_model(id, {E[i], n[i], d[i]});
        row.predictions.emplace_back(v);
        t.push_back(y[i]);
        p.push_back(v);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Domain) throw;
        row.predictions.emplace_back(std::nullopt);
        ++row.excluded;
      }
    }
    row.used = t.size();
    if (row.used == 0) {
      row.rmse = row.mre = std::numeric_limits<double>::infinity();
    } else {
      row.rmse = rmse(t, p);
      row.mre = mre(t, p);
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.rmse < b.rmse; });
  return rows;
}

std::string format_level(double value, std::string_view unit) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s = buf;
  if (!unit.empty()) s += " " + std::string(unit);
  return s;
}

namespace {

std::string full(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::pair<std::string, std::string> split_assignment(const std::string& text, std::string_view what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " expects name=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  out << text;
}

std::string_view an_unit(bool pico) { return pico ? "dB(pW/m)" : "dB(\xC2\xB5W/m)"; }

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::UnboundVariable:
    case ErrorKind::EmptyDataset:
    case ErrorKind::Geometry:
    case ErrorKind::CoincidentPoint:
      return true;
    default:
      return false;
  }
}

std::vector<models::ModelId> parse_model_list(const std::string& text) {
  std::vector<models::ModelId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "an" || item == "ri") {
      const auto q = item == "an" ? models::Quantity::AudibleNoise : models::Quantity::RadioInterference;
      for (const auto& e : models::model_catalog()) {
        if (e.quantity == q) out.push_back(e.id);
      }
    } else {
      out.push_back(models::parse_model_id(item));
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "--models is empty");
  return out;
}

// ---- discover

struct DiscoverArgs {
  std::string data, config, out, target;
  int threads = 0;
  bool serial = false;
};

int cmd_discover(const DiscoverArgs& a, std::ostream& out) {
  RunConfig config = a.config.empty() ? RunConfig{} : read_run_config_file(a.config);
  std::optional<std::string> target = config.target;
  if (!a.target.empty()) target = a.target;
  const Dataset raw = read_csv_file(a.data, target);
  const Dataset data = select_variables(raw, config.variables);
  const auto specs = resolve_specs(config, data);
  evolve::RunOptions options;
  options.execution = a.serial ? evolve::Execution::Serial : evolve::Execution::Parallel;
  options.threads = a.threads;
  const auto report = evolve::run_discovery(data, specs, config.gp, options);

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::InvalidInput, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", evolve::to_json(report).dump(2) + "\n");
  const auto board = evolve::leaderboard(report);
  write_text(dir / "leaderboard.txt", board);
  write_text(dir / "loss_trace.csv", evolve::trace_csv(report));
  out << board;
  return kOk;
}

// ---- eval

struct EvalArgs {
  std::string model, formula, data, target;
  std::optional<double> E, n, d;
  std::vector<std::string> vars;
  std::size_t rank = 1;
  bool pico = false;
};

expr::ExprGraph load_formula(const std::string& path, std::size_t rank) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
  if (j.is_object() && j.contains("equations")) {
    const auto& eqs = j.at("equations");
    if (!eqs.is_array() || rank == 0 || rank > eqs.size()) {
      throw Error(ErrorKind::InvalidInput, "report has no equation of rank " + std::to_string(rank));
    }
    return expr::graph_from_json(eqs[rank - 1].at("graph"));
  }
  return expr::graph_from_json(j);
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.model.empty() == a.formula.empty()) {
    throw Error(ErrorKind::InvalidInput, "give exactly one of --model or --formula");
  }
  if (!a.model.empty()) {
    const auto id = models::parse_model_id(a.model);
    if (!a.E || !a.n || !a.d) throw Error(ErrorKind::InvalidInput, "--model needs --E, --n and --d");
    const models::Bundle b{*a.E, *a.n, *a.d};
    if (models::catalog_entry(id).quantity == models::Quantity::AudibleNoise) {
      auto level = models::an_level(id, b);
      if (a.pico) level = models::convert_reference(level, models::Reference::PicoWattPerMeter);
      out << format_level(level.value, an_unit(a.pico)) << "\n";
    } else {
      out << format_level(models::ri_excitation(id, b), "dB") << "\n";
    }
    return kOk;
  }

  const auto graph = load_formula(a.formula, a.rank);
  if (!a.data.empty()) {
    std::optional<std::string> target;
    if (!a.target.empty()) target = a.target;
    const auto data = read_csv_file(a.data, target);
    const auto batch = expr::evaluate_batch(graph, data);
    out << "prediction\n";
    for (double v : batch.values) out << full(v) << "\n";
    return batch.nonfinite_count() == 0 ? kOk : kComputationFailure;
  }
  expr::Assignment env;
  if (a.E) env["E"] = *a.E;
  if (a.n) env["n"] = *a.n;
  if (a.d) env["d"] = *a.d;
  for (const auto& v : a.vars) {
    const auto [name, value] = split_assignment(v, "--var");
    env[name] = parse_number(value, "--var " + name);
  }
  out << format_level(expr::evaluate(graph, env), "") << "\n";
  return kOk;
}

// ---- predict

struct PredictArgs {
  std::string kind, geometry, model, combination = "3db";
  std::optional<double> C;
  double conductivity = propagation::kAluminiumConductivity;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto id = models::parse_model_id(a.model);
  const auto quantity = models::catalog_entry(id).quantity;
  const auto geometry = propagation::read_geometry_file(a.geometry);
  char line[160];
  if (a.kind == "an") {
    if (quantity != models::Quantity::AudibleNoise) {
      throw Error(ErrorKind::InvalidInput, a.model + " is not an audible-noise model");
    }
    const auto p = propagation::an_ground_level(geometry, id, a.C);
    out << "phase,R_m,L_AN,L_p\n";
    for (std::size_t i = 0; i < p.contributions.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.3f,%.3f,%.3f\n", i, p.distances[i], p.generation[i],
                    p.contributions[i]);
      out << line;
    }
    out << "total " << format_level(p.total, "dB(A)") << " (C=" << p.coefficient << ")\n";
    return kOk;
  }
  if (quantity != models::Quantity::RadioInterference) {
    throw Error(ErrorKind::InvalidInput, a.model + " is not a radio-interference model");
  }
  propagation::RIOptions options;
  options.conductivity = a.conductivity;
  options.combination =
      a.combination == "power" ? propagation::PhaseCombination::PowerSum : propagation::PhaseCombination::ThreeDb;
  const auto p = propagation::ri_line_prediction(geometry, id, options);
  out << "phase,RIEF,level\n";
  for (std::size_t i = 0; i < p.phases.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.3f,%.3f\n", i, p.phases[i].rief, p.phases[i].level);
    out << line;
  }
  out << "total " << format_level(p.level, "dB(\xC2\xB5V/m)") << " (x=" << p.observation_x << ")\n";
  return kOk;
}

// ---- benchmark

struct BenchmarkArgs {
  std::string data, models, target, csv, residuals;
};

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  const auto ids = parse_model_list(a.models);
  std::optional<std::string> target;
  if (!a.target.empty()) target = a.target;
  const auto data = read_csv_file(a.data, target);
  const auto rows = benchmark(data, ids);

  char line[200];
  std::snprintf(line, sizeof line, "%-18s %6s %8s %10s %10s\n", "model", "used", "excluded", "RMSE", "MRE");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-18s %6zu %8zu %10.4f %10.5f\n",
                  std::string(models::to_string(r.model)).c_str(), r.used, r.excluded, r.rmse, r.mre);
    out << line;
  }
  if (!a.csv.empty()) {
    std::string text = "model,used,excluded,rmse,mre\n";
    for (const auto& r : rows) {
      text += std::string(models::to_string(r.model)) + "," + std::to_string(r.used) + "," +
              std::to_string(r.excluded) + "," + full(r.rmse) + "," + full(r.mre) + "\n";
    }
    write_text(a.csv, text);
  }
  if (!a.residuals.empty()) {
    std::string text = "row,target";
    for (const auto& r : rows) text += "," + std::string(models::to_string(r.model));
    text += "\n";
    const auto y = data.target();
    for (std::size_t i = 0; i < data.rows(); ++i) {
      text += std::to_string(i) + "," + full(y[i]);
      for (const auto& r : rows) text += "," + (r.predictions[i] ? full(*r.predictions[i] - y[i]) : "");
      text += "\n";
    }
    write_text(a.residuals, text);
  }
  return kOk;
}

// ---- curves

struct CurvesArgs {
  std::string model, sweep;
  std::vector<std::string> fixed;
  bool pico = false;
};

int cmd_curves(const CurvesArgs& a, std::ostream& out, std::ostream& err) {
  const auto id = models::parse_model_id(a.model);
  const auto [var, range] = split_assignment(a.sweep, "--sweep");
  if (var != "E" && var != "n" && var != "d") throw Error(ErrorKind::InvalidInput, "sweep variable must be E, n or d");
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (c2 == std::string::npos) throw Error(ErrorKind::InvalidInput, "--sweep expects var=lo:hi:steps");
  const double lo = parse_number(std::string_view(range).substr(0, c1), "sweep lo");
  const double hi = parse_number(std::string_view(range).substr(c1 + 1, c2 - c1 - 1), "sweep hi");
  const auto steps_text = range.substr(c2 + 1);
  std::size_t steps = 0;
  {
    const auto [ptr, ec] = std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
    if (ec != std::errc{} || ptr != steps_text.data() + steps_text.size()) {
      throw Error(ErrorKind::InvalidInput, "sweep steps must be a non-negative integer");
    }
  }

  std::map<std::string, double> fixed;
  for (const auto& f : a.fixed) {
    const auto [name, value] = split_assignment(f, "--fixed");
    if (name != "E" && name != "n" && name != "d") throw Error(ErrorKind::InvalidInput, "unknown variable " + name);
    if (name == var) throw Error(ErrorKind::InvalidInput, "swept variable " + var + " is also fixed");
    fixed[name] = parse_number(value, "--fixed " + name);
  }
  for (const char* name : {"E", "n", "d"}) {
    if (name != var && !fixed.count(name)) {
      throw Error(ErrorKind::InvalidInput, std::string("--fixed ") + name + "=... is required");
    }
  }

  const bool is_an = models::catalog_entry(id).quantity == models::Quantity::AudibleNoise;
  std::vector<std::pair<double, double>> points;
  std::vector<double> bad;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = steps == 0 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
    models::Bundle b{var == "E" ? x : fixed["E"], var == "n" ? x : fixed["n"], var == "d" ? x : fixed["d"]};
    try {
      double y = 0.0;
      if (is_an) {
        auto level = models::an_level(id, b);
        if (a.pico) level = models::convert_reference(level, models::Reference::PicoWattPerMeter);
        y = level.value;
      } else {
        y = models::ri_excitation(id, b);
      }
      points.emplace_back(x, y);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Domain) throw;
      bad.push_back(x);
    }
  }
  if (!bad.empty()) {
    err << "error: " << a.model << " is outside its domain at " << var << " =";
    for (double x : bad) err << " " << full(x);
    err << "\n";
    return kComputationFailure;
  }
  out << var << "," << a.model << "\n";
  for (const auto& [x, y] : points) out << full(x) << "," << full(y) << "\n";
  return kOk;
}

int cmd_models(std::ostream& out) {
  for (const auto& e : models::model_catalog()) {
    out << e.key << "\t" << e.source << "\t" << e.formula << "\n";
  }
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corona audible-noise and radio-interference toolkit with monotonic equation discovery", "corona"};
  app.require_subcommand(1);

  DiscoverArgs discover;
  auto* sd = app.add_subcommand("discover", "Search for a monotonic closed-form law on a dataset");
  sd->add_option("--data", discover.data, "Dataset CSV")->required();
  sd->add_option("--config", discover.config, "Run configuration JSON");
  sd->add_option("--out", discover.out, "Output directory")->required();
  sd->add_option("--target", discover.target, "Target column (default: config target, else last column)");
  sd->add_option("--threads", discover.threads, "Worker threads for scoring (0: default)")->check(CLI::NonNegativeNumber);
  sd->add_flag("--serial", discover.serial, "Score candidates on one thread");

  EvalArgs eval;
  auto* se = app.add_subcommand("eval", "Evaluate a catalogued model or a saved formula");
  se->add_option("--model", eval.model, "Model id, e.g. an-discovered-3");
  se->add_option("--formula", eval.formula, "Graph JSON or report.json");
  se->add_option("--rank", eval.rank, "Equation rank when --formula is a report")->check(CLI::PositiveNumber);
  se->add_option("--E", eval.E, "Surface gradient, kV/cm");
  se->add_option("--n", eval.n, "Number of subconductors");
  se->add_option("--d", eval.d, "Subconductor diameter, cm");
  se->add_option("--var", eval.vars, "Extra binding name=value for --formula");
  se->add_option("--data", eval.data, "CSV to evaluate --formula on, one prediction per row");
  se->add_option("--target", eval.target, "Target column of --data");
  se->add_flag("--pw", eval.pico, "Report audible noise in dB re 1 pW/m");

  PredictArgs predict;
  auto* sp = app.add_subcommand("predict", "Ground-level AN or RI for a line geometry");
  sp->add_option("--kind", predict.kind, "an or ri")->required()->check(CLI::IsMember({"an", "ri"}));
  sp->add_option("--geometry", predict.geometry, "Geometry JSON")->required();
  sp->add_option("--model", predict.model, "Model id")->required();
  sp->add_option("--C", predict.C, "AN propagation coefficient override");
  sp->add_option("--combination", predict.combination, "RI phase combination: 3db or power")
      ->check(CLI::IsMember({"3db", "power"}));
  sp->add_option("--conductivity", predict.conductivity, "Conductor conductivity, S/m")->check(CLI::PositiveNumber);

  BenchmarkArgs bench;
  auto* sb = app.add_subcommand("benchmark", "RMSE and MRE of catalogued models on a dataset");
  sb->add_option("--data", bench.data, "Dataset CSV with E, n, d and a target")->required();
  sb->add_option("--models", bench.models, "Comma-separated ids; 'an' or 'ri' for a whole family")->required();
  sb->add_option("--target", bench.target, "Target column (default: last)");
  sb->add_option("--csv", bench.csv, "Write the table as CSV");
  sb->add_option("--residuals", bench.residuals, "Write per-row residuals as CSV");

  CurvesArgs curves;
  auto* sc = app.add_subcommand("curves", "Sweep one input of a model and emit CSV");
  sc->add_option("--model", curves.model, "Model id")->required();
  sc->add_option("--sweep", curves.sweep, "var=lo:hi:steps")->required();
  sc->add_option("--fixed", curves.fixed, "k=v for the other inputs");
  sc->add_flag("--pw", curves.pico, "Report audible noise in dB re 1 pW/m");

  auto* sm = app.add_subcommand("models", "List the model catalog");

  std::vector<const char*> argv;
  argv.push_back("corona");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (sd->parsed()) return cmd_discover(discover, out);
    if (se->parsed()) return cmd_eval(eval, out);
    if (sp->parsed()) return cmd_predict(predict, out);
    if (sb->parsed()) return cmd_benchmark(bench, out);
    if (sc->parsed()) return cmd_curves(curves, out, err);
    if (sm->parsed()) return cmd_models(out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return is_input_error(e.kind()) ? kInputError : kComputationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kComputationFailure;
  }
  return kInputError;
}

}  // namespace corona::cli
