#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corona/dataset.hpp"
#include "corona/expr/eval.hpp"
#include "corona/expr/graph.hpp"

namespace corona::fit {

inline constexpr double kInfiniteLoss = std::numeric_limits<double>::infinity();

struct FitResult {
  expr::ExprGraph graph;  // root coefficients replaced by the fitted values
  std::vector<double> coefficients;
  double r2 = 0.0;
};

/// Ordinary least squares over the root-level terms, minimum-norm when the
/// design is rank deficient. Throws Error(Rejected) when any row has a
/// non-finite term and Error(Degenerate) when the target is constant.
FitResult fit_coefficients(const expr::ExprGraph& graph, const Dataset& data);

/// Minimum-norm least-squares solution of X c = y, X row-major rows x cols.
std::vector<double> least_squares(std::span<const double> design, std::size_t rows,
                                  std::size_t cols, std::span<const double> target);

/// 1 - SS_res / SS_tot with SS_tot about the target mean.
/// Throws Error(Degenerate) when every target value is equal.
double r_squared(std::span<const double> target, std::span<const double> predicted);

/// 1 - R^2; may exceed 1 when worse than the mean predictor.
double accuracy_loss(std::span<const double> target, std::span<const double> predicted);
double accuracy_loss(const expr::ExprGraph& graph, const Dataset& data);

struct MonotonicitySpec {
  std::string variable;
  int sign = +1;  // +1 nondecreasing, -1 nonincreasing
  double lo = 0.0;
  double hi = 1.0;
  std::size_t grid = 20;
  std::map<std::string, double, std::less<>> nominal;  // every other variable

  /// Throws Error(InvalidInput) when lo >= hi, grid < 2 or sign not +-1.
  void check() const;
  std::vector<double> grid_points() const;
};

inline constexpr std::size_t kDefaultGridSize = 20;

/// Nominal values at per-variable medians, domain [0.8 min, 1.5 max]
/// clipped to positive values.
MonotonicitySpec default_monotonicity_spec(const Dataset& data, const std::string& variable,
                                           int sign, std::size_t grid = kDefaultGridSize);

/// Squared hinge over consecutive steps: sum max(0, -sign * dy)^2.
/// Any non-finite value yields +inf.
double sweep_penalty(std::span<const double> sweep, int sign);

/// Sum over specs of the sweep penalty along each spec's grid.
double monotonicity_loss(const expr::ExprGraph& graph, std::span<const MonotonicitySpec> specs);

struct LossBreakdown {
  double l_acc = kInfiniteLoss;
  double l_mono = kInfiniteLoss;
  double total = kInfiniteLoss;
  double r2 = -kInfiniteLoss;

  static LossBreakdown rejected() { return {}; }
  static LossBreakdown combine(double l_acc, double l_mono, double lambda_mono, double r2);
  bool finite() const;
};

/// Reusable scorer: binds the dataset and precomputes every monotonicity
/// grid once, so scoring a candidate is one compile plus a few batch runs.
/// Safe to share read-only across threads.
class Objective {
 public:
  /// Throws Error(EmptyDataset) for fewer than 2 rows, Error(Degenerate)
  /// for a constant target and Error(InvalidInput) for bad specs or
  /// lambda_mono <= 0.
  Objective(const Dataset& data, std::vector<MonotonicitySpec> specs, double lambda_mono);

  struct Scored {
    expr::ExprGraph graph;
    LossBreakdown loss;
  };

  /// Fits the coefficients and evaluates the combined loss. Rejected
  /// candidates come back unfitted with an infinite loss; never throws for
  /// candidate-dependent reasons.
  Scored score(const expr::ExprGraph& graph) const;

  const Dataset& data() const noexcept { return data_; }
  const std::vector<MonotonicitySpec>& specs() const noexcept { return specs_; }
  double lambda_mono() const noexcept { return lambda_; }

 private:
  struct Sweep {
    int sign;
    std::size_t points;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<expr::ColumnBinding> bindings() const;
  };

  Dataset data_;
  std::vector<MonotonicitySpec> specs_;
  double lambda_;
  std::vector<Sweep> sweeps_;
};

LossBreakdown total_loss(const expr::ExprGraph& graph, const Dataset& data,
                         std::span<const MonotonicitySpec> specs, double lambda_mono);

}  // namespace corona::fit
