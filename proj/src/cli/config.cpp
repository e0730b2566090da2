#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "corona/cli/cli.hpp"
#include "corona/error.hpp"

namespace corona::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, "config: " + what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad("'" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad("'" + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad("'" + key + "' must be a string");
  return v.get<std::string>();
}

int parse_sign(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "+1" || s == "1") return +1;
    if (s == "-1") return -1;
  } else if (v.is_number_integer()) {
    const auto s = v.get<int>();
    if (s == 1 || s == -1) return s;
  }
  bad("monotonicity sign must be \"+1\" or \"-1\"");
}

MonotonicityEntry parse_mono(const json& m, std::size_t index) {
  const auto where = "monotonicity[" + std::to_string(index) + "]";
  reject_unknown(m, {"var", "sign", "domain", "grid"}, where);
  if (!m.contains("var")) bad(where + " needs 'var'");
  MonotonicityEntry e;
  e.var = get_string(m.at("var"), "var");
  if (m.contains("sign")) e.sign = parse_sign(m.at("sign"));
  if (m.contains("domain")) {
    const auto& d = m.at("domain");
    if (!d.is_array() || d.size() != 2) bad(where + " domain must be [lo, hi]");
    const double lo = get_number(d[0], "domain"), hi = get_number(d[1], "domain");
    if (!(lo < hi)) bad(where + " domain needs lo < hi");
    e.domain = std::pair{lo, hi};
  }
  if (m.contains("grid")) {
    e.grid = get_count(m.at("grid"), "grid");
    if (*e.grid < 2) bad(where + " grid must be at least 2");
  }
  return e;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  reject_unknown(j,
                 {"variables", "target", "operators", "population_size", "generations", "max_terms", "lambda_mono",
                  "monotonicity", "seed", "exponent_range", "mutation_rates", "template_weights",
                  "crossover_probability", "mutation_probability", "crossover_terms", "dedup", "report_size"},
                 "run config");
  RunConfig c;
  auto& gp = c.gp;
  if (j.contains("variables")) {
    const auto& v = j.at("variables");
    if (!v.is_array() || v.empty()) bad("'variables' must be a non-empty array of names");
    for (const auto& name : v) c.variables.push_back(get_string(name, "variables"));
  }
  if (j.contains("target")) c.target = get_string(j.at("target"), "target");
  if (j.contains("operators")) {
    std::set<std::string> ops;
    for (const auto& o : j.at("operators")) {
      const auto s = get_string(o, "operators");
      if (s != "add" && s != "mul" && s != "pow" && s != "log") bad("unknown operator '" + s + "'");
      ops.insert(s);
    }
    if (!ops.count("add") || !ops.count("mul")) bad("operators must include add and mul");
    gp.templates.allow_pow = ops.count("pow") > 0;
    gp.templates.allow_log = ops.count("log") > 0;
    if (!gp.templates.allow_log) gp.template_weights[2] = 0.0;
  }
  if (j.contains("population_size")) gp.population_size = get_count(j.at("population_size"), "population_size");
  if (j.contains("generations")) gp.generations = get_count(j.at("generations"), "generations");
  if (j.contains("max_terms")) gp.max_terms = get_count(j.at("max_terms"), "max_terms");
  if (j.contains("lambda_mono")) gp.lambda_mono = get_number(j.at("lambda_mono"), "lambda_mono");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      bad("'seed' must be a non-negative integer");
    }
    gp.seed = s.get<std::uint64_t>();
  }
  if (j.contains("exponent_range")) {
    const auto& r = j.at("exponent_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      bad("'exponent_range' must be [lo, hi] integers");
    }
    const int lo = r[0].get<int>(), hi = r[1].get<int>();
    if (lo > hi) bad("'exponent_range' needs lo <= hi");
    gp.templates.exponents = expr::exponent_alphabet(lo, hi);
  }
  if (j.contains("mutation_rates")) {
    const auto& m = j.at("mutation_rates");
    reject_unknown(m, {"edge_feature", "subgraph_replace", "add_remove"}, "mutation_rates");
    if (m.contains("edge_feature")) gp.rates.edge_feature = get_number(m.at("edge_feature"), "edge_feature");
    if (m.contains("subgraph_replace")) {
      gp.rates.subgraph_replace = get_number(m.at("subgraph_replace"), "subgraph_replace");
    }
    if (m.contains("add_remove")) gp.rates.add_remove = get_number(m.at("add_remove"), "add_remove");
  }
  if (j.contains("template_weights")) {
    const auto& w = j.at("template_weights");
    reject_unknown(w, {"polynomial", "rational", "logarithmic", "constant"}, "template_weights");
    const char* names[] = {"polynomial", "rational", "logarithmic", "constant"};
    for (std::size_t k = 0; k < 4; ++k) {
      if (w.contains(names[k])) gp.template_weights[k] = get_number(w.at(names[k]), names[k]);
    }
  }
  if (j.contains("crossover_probability")) {
    gp.crossover_probability = get_number(j.at("crossover_probability"), "crossover_probability");
  }
  if (j.contains("mutation_probability")) {
    gp.mutation_probability = get_number(j.at("mutation_probability"), "mutation_probability");
  }
  if (j.contains("crossover_terms")) gp.crossover_terms = get_count(j.at("crossover_terms"), "crossover_terms");
  if (j.contains("dedup")) gp.dedup = get_bool(j.at("dedup"), "dedup");
  if (j.contains("report_size")) gp.report_size = get_count(j.at("report_size"), "report_size");
  if (j.contains("monotonicity")) {
    const auto& m = j.at("monotonicity");
    if (!m.is_array()) bad("'monotonicity' must be an array");
    for (std::size_t i = 0; i < m.size(); ++i) c.monotonicity.push_back(parse_mono(m[i], i));
  }
  try {
    gp.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return c;
}

RunConfig read_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

Dataset select_variables(const Dataset& data, const std::vector<std::string>& variables) {
  if (variables.empty()) return data;
  std::vector<std::vector<double>> cols;
  for (const auto& v : variables) {
    if (!data.has_variable(v)) throw Error(ErrorKind::InvalidInput, "config variable '" + v + "' is not a column");
    const auto c = data.column(v);
    cols.emplace_back(c.begin(), c.end());
  }
  const auto t = data.target();
  return Dataset(variables, std::move(cols), data.target_name(), {t.begin(), t.end()});
}

std::vector<fit::MonotonicitySpec> resolve_specs(const RunConfig& config, const Dataset& data) {
  std::vector<fit::MonotonicitySpec> out;
  for (const auto& e : config.monotonicity) {
    if (!data.has_variable(e.var)) {
      throw Error(ErrorKind::InvalidInput, "monotonicity variable '" + e.var + "' is not a dataset variable");
    }
    auto spec = fit::default_monotonicity_spec(data, e.var, e.sign, e.grid.value_or(fit::kDefaultGridSize));
    if (e.domain) {
      spec.lo = e.domain->first;
      spec.hi = e.domain->second;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace corona::cli
