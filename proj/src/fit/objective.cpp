#include "corona/fit/objective.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "corona/error.hpp"

namespace corona::fit {

using expr::ColumnBinding;
using expr::CompiledGraph;
using expr::ExprGraph;
using expr::TermMatrix;

namespace {

std::vector<ColumnBinding> bind(const Dataset& data) {
  std::vector<ColumnBinding> out;
  for (const auto& name : data.variable_names()) out.push_back({name, data.column(name)});
  return out;
}

void require_fit_target(std::span<const double> y) {
  if (y.size() < 2) throw Error(ErrorKind::EmptyDataset, "fitting needs at least two rows");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*lo == *hi) throw Error(ErrorKind::Degenerate, "target is constant; R^2 is undefined");
}

std::vector<double> predict(const TermMatrix& m, std::span<const double> c) {
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.terms; ++j) s += c[j] * m.at(r, j);
    out[r] = s;
  }
  return out;
}

}  // namespace

std::vector<double> least_squares(std::span<const double> design, std::size_t rows,
                                  std::size_t cols, std::span<const double> target) {
  if (design.size() != rows * cols || target.size() != rows) {
    throw Error(ErrorKind::InvalidInput, "least_squares: dimension mismatch");
  }
  if (cols == 0) return {};
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> x(design.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
  const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(rows));
  // Complete orthogonal decomposition gives the minimum-norm solution for
  // rank-deficient designs (duplicate terms are common in a population).
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  const Eigen::VectorXd c = cod.solve(y);
  return {c.data(), c.data() + c.size()};
}

double r_squared(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) {
    throw Error(ErrorKind::InvalidInput, "r_squared: length mismatch");
  }
  require_fit_target(target);
  double mean = 0.0;
  for (double v : target) mean += v;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - predicted[i]) * (target[i] - predicted[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

double accuracy_loss(std::span<const double> target, std::span<const double> predicted) {
  return 1.0 - r_squared(target, predicted);
}

FitResult fit_coefficients(const ExprGraph& graph, const Dataset& data) {
  if (!data.has_target()) throw Error(ErrorKind::InvalidInput, "dataset has no target column");
  require_fit_target(data.target());
  const CompiledGraph program(graph);
  const auto cols = bind(data);
  const auto m = program.run(cols, data.rows());
  if (!m.all_finite()) {
    throw Error(ErrorKind::Rejected, "candidate has non-finite terms on the dataset");
  }
  auto c = least_squares(m.values, m.rows, m.terms, data.target());
  const auto yhat = predict(m, c);
  FitResult out{graph.with_coefficients(c), c, r_squared(data.target(), yhat)};
  return out;
}

double accuracy_loss(const ExprGraph& graph, const Dataset& data) {
  return 1.0 - fit_coefficients(graph, data).r2;
}

void MonotonicitySpec::check() const {
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidInput, "monotonicity sign must be +1 or -1");
  if (!(lo < hi)) throw Error(ErrorKind::InvalidInput, "monotonicity domain needs lo < hi for '" + variable + "'");
  if (grid < 2) throw Error(ErrorKind::InvalidInput, "monotonicity grid needs at least 2 points");
  if (nominal.count(variable)) {
    throw Error(ErrorKind::InvalidInput, "nominal values must not include the swept variable");
  }
}

std::vector<double> MonotonicitySpec::grid_points() const {
  std::vector<double> out(grid);
  const double step = (hi - lo) / static_cast<double>(grid - 1);
  for (std::size_t l = 0; l < grid; ++l) out[l] = lo + step * static_cast<double>(l);
  out.back() = hi;
  return out;
}

MonotonicitySpec default_monotonicity_spec(const Dataset& data, const std::string& variable,
                                           int sign, std::size_t grid) {
  MonotonicitySpec spec;
  spec.variable = variable;
  spec.sign = sign;
  spec.grid = grid;
  spec.hi = 1.5 * data.max(variable);
  spec.lo = 0.8 * data.min(variable);
  const double floor = 1e-6 * std::max(1.0, std::abs(spec.hi));
  if (spec.lo <= 0.0) spec.lo = floor;
  if (spec.hi <= spec.lo) spec.hi = spec.lo + 1.0;
  for (const auto& name : data.variable_names()) {
    if (name != variable) spec.nominal[name] = data.median(name);
  }
  return spec;
}

double sweep_penalty(std::span<const double> sweep, int sign) {
  double total = 0.0;
  for (double v : sweep) {
    if (!std::isfinite(v)) return kInfiniteLoss;
  }
  for (std::size_t l = 0; l + 1 < sweep.size(); ++l) {
    const double violation = std::max(0.0, -static_cast<double>(sign) * (sweep[l + 1] - sweep[l]));
    total += violation * violation;
  }
  return total;
}

namespace {

struct SweepColumns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

SweepColumns build_sweep(const MonotonicitySpec& spec) {
  SweepColumns s;
  const auto xs = spec.grid_points();
  s.names.push_back(spec.variable);
  s.columns.push_back(xs);
  for (const auto& [name, value] : spec.nominal) {
    s.names.push_back(name);
    s.columns.emplace_back(xs.size(), value);
  }
  return s;
}

std::vector<ColumnBinding> bind(const SweepColumns& s) {
  std::vector<ColumnBinding> out;
  for (std::size_t i = 0; i < s.names.size(); ++i) out.push_back({s.names[i], s.columns[i]});
  return out;
}

double sweep_loss(const CompiledGraph& program, std::span<const ColumnBinding> cols,
                  std::size_t points, std::span<const double> coefficients, int sign) {
  const auto m = program.run(cols, points);
  if (!m.all_finite()) return kInfiniteLoss;
  return sweep_penalty(predict(m, coefficients), sign);
}

}  // namespace

double monotonicity_loss(const ExprGraph& graph, std::span<const MonotonicitySpec> specs) {
  const CompiledGraph program(graph);
  std::vector<double> coeffs;
  for (auto k : graph.out_edges(graph.root())) {
    const auto& e = graph.edges()[k];
    const auto kind = graph.node(e.to).kind;
    coeffs.push_back(kind == expr::OpKind::Pow || kind == expr::OpKind::Log ? 1.0 : e.feature);
  }
  double total = 0.0;
  for (const auto& spec : specs) {
    spec.check();
    const auto sweep = build_sweep(spec);
    const auto cols = bind(sweep);
    total += sweep_loss(program, cols, spec.grid, coeffs, spec.sign);
  }
  return total;
}

LossBreakdown LossBreakdown::combine(double l_acc, double l_mono, double lambda_mono, double r2) {
  LossBreakdown b;
  b.l_acc = l_acc;
  b.l_mono = l_mono;
  b.r2 = r2;
  if (std::isfinite(l_acc) && std::isfinite(l_mono)) {
    b.total = l_acc + lambda_mono * l_mono;
  } else {
    b.total = kInfiniteLoss;
  }
  if (std::isnan(b.total)) b.total = kInfiniteLoss;
  return b;
}

bool LossBreakdown::finite() const { return std::isfinite(total); }

std::vector<ColumnBinding> Objective::Sweep::bindings() const {
  std::vector<ColumnBinding> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], columns[i]});
  return out;
}

Objective::Objective(const Dataset& data, std::vector<MonotonicitySpec> specs, double lambda_mono)
    : data_(data), specs_(std::move(specs)), lambda_(lambda_mono) {
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw Error(ErrorKind::InvalidInput, "lambda_mono must be positive");
  }
  if (data_.rows() < 2) throw Error(ErrorKind::EmptyDataset, "dataset needs at least two rows");
  if (!data_.has_target()) throw Error(ErrorKind::InvalidInput, "dataset has no target column");
  require_fit_target(data_.target());
  for (const auto& spec : specs_) {
    spec.check();
    if (!data_.has_variable(spec.variable)) {
      throw Error(ErrorKind::InvalidInput,
                  "monotonicity variable '" + spec.variable + "' is not a dataset column");
    }
    // Every dataset variable gets a column so any candidate can be swept;
    // nominals missing from the spec fall back to the dataset median.
    auto s = build_sweep(spec);
    for (const auto& name : data_.variable_names()) {
      if (name == spec.variable || spec.nominal.count(name)) continue;
      s.names.push_back(name);
      s.columns.emplace_back(spec.grid, data_.median(name));
    }
    sweeps_.push_back({spec.sign, spec.grid, std::move(s.names), std::move(s.columns)});
  }
}

Objective::Scored Objective::score(const ExprGraph& graph) const {
  Scored out{graph, LossBreakdown::rejected()};
  std::optional<CompiledGraph> program;
  try {
    program.emplace(graph);
  } catch (const Error&) {
    return out;
  }
  const auto cols = bind(data_);
  const auto m = program->run(cols, data_.rows());
  if (!m.all_finite()) return out;

  const auto c = least_squares(m.values, m.rows, m.terms, data_.target());
  for (double v : c) {
    if (!std::isfinite(v)) return out;
  }
  const auto yhat = predict(m, c);
  const double r2 = r_squared(data_.target(), yhat);

  double l_mono = 0.0;
  for (const auto& sweep : sweeps_) {
    const auto sc = sweep.bindings();
    l_mono += sweep_loss(*program, sc, sweep.points, c, sweep.sign);
    if (!std::isfinite(l_mono)) break;
  }
  out.graph = graph.with_coefficients(c);
  out.loss = LossBreakdown::combine(1.0 - r2, l_mono, lambda_, r2);
  return out;
}

LossBreakdown total_loss(const ExprGraph& graph, const Dataset& data,
                         std::span<const MonotonicitySpec> specs, double lambda_mono) {
  const Objective objective(data, {specs.begin(), specs.end()}, lambda_mono);
  return objective.score(graph).loss;
}

}  // namespace corona::fit
