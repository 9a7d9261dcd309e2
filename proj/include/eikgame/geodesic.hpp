#pragma once

#include <vector>

#include "eikgame/eikonal.hpp"
#include "eikgame/grid.hpp"

namespace eikgame {

/// Polyline from a start node down to the seeds. On angular grids every
/// vertex carries its heading as the third coordinate.
struct Path {
  std::vector<Point> points;
  /// U(start) - U(vertex), i.e. cost accumulated from the start.
  std::vector<double> cumulative_cost;
  bool angular = false;

  std::size_t size() const { return points.size(); }
  /// Euclidean length of the planar projection.
  double planar_length() const;
  Path reversed() const;
};

/// Descends the omega-weighted upwind directions of the frozen graph with
/// half-cell steps and multilinear interpolation of the per-node directions.
/// Throws std::invalid_argument if `start` is unreached and
/// std::runtime_error if the iteration budget is exhausted.
Path trace(const SolveResult& res, const Grid& grid, std::size_t start);

/// Circumscribed-circle curvature of consecutive vertex triples after
/// resampling the planar projection by arc length at `spacing`. Degenerate
/// triples are skipped. Throws std::invalid_argument below 3 vertices.
std::vector<double> discrete_curvature(const Path& path, double spacing);

/// Interpolated value at a continuous index position (cell centers sit at
/// integer coordinates); returns kUnreached when no corner is finite.
double interpolate_value(const SolveResult& res, const Grid& grid, const std::array<double, 3>& q);

/// Symmetric Hausdorff distance between planar projections.
double hausdorff_distance(const Path& a, const Path& b);

}  // namespace eikgame
