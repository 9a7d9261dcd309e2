#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eikgame {

struct AscentConfig {
  int memory = 10;
  int max_iterations = 100;
  /// Stop once the projected gradient norm falls below this.
  double gradient_tolerance = 1e-10;
  std::vector<double> lower;
  std::vector<double> upper;
  /// Sufficient-increase constant of the backtracking line search.
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;

  void validate(std::size_t dimension) const;
};

struct AscentRecord {
  int iteration = 0;
  double value = 0.0;
  /// Euclidean length of the accepted move.
  double step = 0.0;
  /// Projected gradient norm at the iterate.
  double gradient_norm = 0.0;
};

enum class AscentStop { IterationBudget, Converged, LineSearchFailure };

std::string to_string(AscentStop stop);

struct AscentResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<AscentRecord> history;
  AscentStop stop = AscentStop::IterationBudget;
  int evaluations = 0;
};

/// Returns f(x) and its gradient. A non-finite value marks an inadmissible
/// point; the line search backs off from it.
using Objective = std::function<std::pair<double, std::vector<double>>(std::span<const double>)>;

/// |P(x + g) - x| for the box [lower, upper].
double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                               std::span<const double> lower, std::span<const double> upper);

/// Projected L-BFGS ascent with a monotone backtracking line search.
/// Throws std::invalid_argument when x0 violates the bounds and
/// NumericalError when f(x0) is not finite.
AscentResult maximize(const Objective& f, std::vector<double> x0, const AscentConfig& cfg);

}  // namespace eikgame
