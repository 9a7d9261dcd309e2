#pragma once

#include <span>
#include <utility>
#include <vector>

#include "eikgame/eikonal.hpp"
#include "eikgame/stencils.hpp"

namespace eikgame {

/// J = sum coeff * U(node).
struct TargetFunctional {
  std::vector<std::pair<std::size_t, double>> terms;
};

/// Reverse-mode sensitivities of a TargetFunctional.
struct SensitivityField {
  /// dJ/d ln C(x) for scalar-cost models; zero off the accepted set.
  std::vector<double> per_node;
  /// dJ/dw for every edge of SolveResult::edges.
  std::vector<double> per_edge;
  /// dJ/dU(x) after back-propagation (seeds keep theirs, they are fixed).
  std::vector<double> adjoint;
};

/// Tangent propagation of a per-node log-cost perturbation (scalar models,
/// w proportional to C^-2). Seeds carry dU = 0.
std::vector<double> forward_diff(const SolveResult& res, std::span<const double> dlog_cost);

/// Tangent propagation of per-edge weight perturbations dw (any model).
std::vector<double> forward_diff_weights(const SolveResult& res, std::span<const double> dweight);

/// Adjoint sweep in reverse acceptance order. O(number of active edges).
/// Throws std::invalid_argument when a target node was not accepted.
SensitivityField reverse_diff(const SolveResult& res, const TargetFunctional& target);

/// Chains per-edge weight sensitivities of a Riemannian solve into dJ/dM per
/// planar node, through the Selling weights w = -<b_i, D b_j> and
/// dD = -D dM D. `metric` must be the field's metric.
std::vector<Matrix2> metric_sensitivity(const SolveResult& res, const StencilField& field,
                                        const SensitivityField& sens,
                                        std::span<const Matrix2> metric);

}  // namespace eikgame
