#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "eikgame/grid.hpp"
#include "eikgame/stencils.hpp"

namespace eikgame {

/// Value of unreached and masked nodes. Finite arithmetic never produces it.
inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

struct Seed {
  std::size_t node = 0;
  double value = 0.0;
};

using SeedSet = std::vector<Seed>;

/// Neighbor term (w, a) of a local equation.
struct WeightedValue {
  double weight = 0.0;
  double value = kUnreached;
};

/// Solves min over controls of the root u of sum_{a_i < u} w_i (u - a_i)^2 = 1.
/// Returns kUnreached when no control has a finite neighbor.
double local_update(const std::vector<std::vector<WeightedValue>>& controls);

/// Root of a single control. `terms` is sorted by value in place; `included`
/// receives the number of leading terms with a_i < u.
double solve_control(std::span<WeightedValue> terms, int* included = nullptr);

/// Upwind edge x -> y = x - offset with y accepted before x.
struct ActiveEdge {
  std::uint32_t neighbor = 0;
  std::array<std::int8_t, 3> offset{0, 0, 0};
  double weight = 0.0;
  /// U(x) - U(y) > 0.
  double delta = 0.0;

  double omega() const { return weight * delta; }
};

/// Solution values together with the frozen upwind graph.
struct SolveResult {
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> steps{1.0, 1.0, 1.0};
  std::vector<double> values;
  /// Accepted nodes in acceptance order.
  std::vector<std::uint32_t> order;
  /// Acceptance position of each node, kNotAccepted otherwise.
  std::vector<std::uint32_t> position;
  /// CSR offsets into `edges`, indexed by acceptance position.
  std::vector<std::uint32_t> edge_begin;
  std::vector<ActiveEdge> edges;
  /// Index of the minimizing control, per acceptance position.
  std::vector<std::uint8_t> active_control;
  SeedSet seeds;
  std::vector<std::uint8_t> is_seed;

  static constexpr std::uint32_t kNotAccepted = std::numeric_limits<std::uint32_t>::max();

  bool accepted(std::size_t node) const { return position[node] != kNotAccepted; }
  std::span<const ActiveEdge> edges_at(std::size_t pos) const {
    return {edges.data() + edge_begin[pos], edges.data() + edge_begin[pos + 1]};
  }
  std::span<const ActiveEdge> edges_of(std::size_t node) const {
    return edges_at(position[node]);
  }
};

/// Label-setting fast marching over the stencils of `field`. Throws
/// std::invalid_argument for masked, out of range or non-finite seeds.
SolveResult fast_march(const StencilField& field, const SeedSet& seeds);

/// Seeds every angular fiber of the planar cell containing `p` at `value`.
SeedSet seeds_at_point(const Grid& grid, Vec2 p, double value = 0.0);

}  // namespace eikgame
