#pragma once

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "eikgame/eikonal.hpp"
#include "eikgame/geodesic.hpp"
#include "eikgame/grid.hpp"
#include "eikgame/stencils.hpp"

namespace eikgame {

/// No sensors: unit cost everywhere.
struct FreeModel {};

/// Fresh paint density per planar cell (row-major, nx * ny).
struct PaintField {
  std::vector<double> density;
  double min_density = 0.1;
  double max_density = 1.0;
};

struct CameraSet {
  std::vector<Vec2> points;
  double background = 0.05;
  double cost_cap = 1e6;
};

struct RadarSet {
  std::vector<Vec2> points;
  /// Broadside to nose-on detectability ratio, in (0, 1].
  double delta = 1.0;
  Vec2 box_lower{0.4, 0.1};
  Vec2 box_upper{1.6, 0.9};
  double cost_cap = 1e6;
};

using SensorConfig = std::variant<FreeModel, PaintField, CameraSet, RadarSet>;

struct GameSpec {
  MobilityModel model = MobilityModel::Isotropic;
  double rho = 0.3;
  double epsilon = 0.1;
  Vec2 seed{0.2, 0.5};
  Vec2 keypoint{1.8, 0.5};
  /// Soft-min temperature in objective units; unset means 1% of the current
  /// hard minimum, refreshed on every evaluation.
  std::optional<double> tau;
  /// Spread the keypoint over the 3x3 box of adjacent cells.
  bool blur = true;

  void validate() const;
};

struct SoftMin {
  double value = 0.0;
  /// d value / d v_i; sums to 1 over finite entries.
  std::vector<double> weights;
  /// d value / d tau.
  double dtau = 0.0;
};

/// -tau ln sum exp(-v_i / tau), shift-stable, +inf entries dropped. Throws
/// std::invalid_argument if tau <= 0 or every entry is +inf.
SoftMin softmin(std::span<const double> values, double tau);

/// Weighted variant -tau ln sum w_i exp(-v_i / tau).
SoftMin softmin(std::span<const double> values, std::span<const double> prior, double tau);

/// C(p, theta) = xi(p), broadcast over angular fibers. Throws on
/// out-of-bounds densities.
std::vector<double> cost_field_paint(const PaintField& paint, const Grid& grid);

/// True iff the segment sampled every h/2 touches no masked cell.
bool line_of_sight(Vec2 p, Vec2 q, const Grid& grid);

/// Visibility of each camera from each planar cell, camera-major.
struct CameraVisibility {
  std::size_t cameras = 0;
  std::vector<std::uint8_t> visible;

  bool operator()(std::size_t camera, std::size_t cell, std::size_t planar) const {
    return visible[camera * planar + cell] != 0;
  }
};

CameraVisibility camera_visibility(const CameraSet& cams, const Grid& grid);

/// Planar cost c0 + sum over visible cameras of |q - p|^-2, capped. Pass
/// `frozen` to reuse a previously computed visibility.
std::vector<double> cost_field_camera(const CameraSet& cams, const Grid& grid,
                                      const CameraVisibility* frozen = nullptr);

/// Detection factor sqrt(sum_q (<v,n_pq>^2 + delta^2 <v,n_pq^perp>^2) / |p-q|^4)
/// for a unit velocity v, with distances clamped below by `min_distance`.
double radar_factor(const RadarSet& radars, Vec2 p, Vec2 v, double min_distance);

/// sum_q (n n^T + delta^2 n_perp n_perp^T) / |p-q|^4.
Matrix2 radar_metric(const RadarSet& radars, Vec2 p, double min_distance);

struct RadarCost {
  /// Curvature models: C(p, theta) per node.
  std::vector<double> scalar;
  /// Riemannian model: M(p) per planar node.
  std::vector<Matrix2> metric;
};

RadarCost cost_field_radar(const RadarSet& radars, const Grid& grid, MobilityModel model);

/// Flattened strategy parameters: densities for paint, (x, y) per point for
/// cameras and radars, nothing for the free model.
std::vector<double> parameters(const SensorConfig& config);
SensorConfig with_parameters(const SensorConfig& config, std::span<const double> params);

struct ParameterBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

ParameterBounds parameter_bounds(const SensorConfig& config, const Grid& grid);

/// Throws std::invalid_argument when the config does not fit grid or model.
void validate_sensors(const SensorConfig& config, const Grid& grid, MobilityModel model);

struct EvaluateOptions {
  bool gradient = true;
  bool paths = false;
  bool keep_solves = false;
  /// Camera game: evaluate with this visibility instead of recomputing it.
  const CameraVisibility* frozen_visibility = nullptr;
};

struct ObjectiveResult {
  /// Game value, before any supply cost.
  double value = 0.0;
  /// value minus the paint supply cost (equal to value for other sensors).
  double net = 0.0;
  std::vector<double> gradient;
  std::vector<double> net_gradient;
  double tau = 0.0;
  /// Target node of largest soft-min weight.
  std::size_t target_node = 0;
  /// Planar dJ/d ln C summed over fibers and both solves.
  std::vector<double> sensitivity;
  /// Planar min over fibers of the forward value function.
  std::vector<double> value_map;
  std::optional<Path> forward_path;
  std::optional<Path> return_path;
  std::shared_ptr<const SolveResult> forward_solve;
  std::shared_ptr<const SolveResult> return_solve;
  double solve_seconds = 0.0;
  double gradient_seconds = 0.0;
};

/// Game value and its gradient with respect to parameters(config).
/// Throws NumericalError when the keypoint is unreachable.
ObjectiveResult evaluate(const SensorConfig& config, const GameSpec& spec, const Grid& grid,
                         const EvaluateOptions& options = {});

/// Planar cells of the target set (keypoint cell or its 3x3 box).
std::vector<std::size_t> target_cells(const GameSpec& spec, const Grid& grid);

/// Thread cap from EIKGAME_THREADS (default: hardware concurrency, >= 1).
unsigned thread_budget();

}  // namespace eikgame
