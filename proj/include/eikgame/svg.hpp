#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eikgame/geodesic.hpp"
#include "eikgame/grid.hpp"
#include "eikgame/stencils.hpp"

namespace eikgame {

using Segment = std::array<Vec2, 2>;

/// Marching squares over the planar cell centers. Blocks with a non-finite
/// corner are skipped; saddles are split by the block mean.
std::vector<Segment> contour_segments(const Grid& grid, std::span<const double> planar,
                                      double level);

enum class Glyph { Camera, Radar };

struct SvgPath {
  Path path;
  std::string color;
};

struct SvgScene {
  const Grid* grid = nullptr;
  std::string title;
  /// Planar values drawn as level sets.
  std::vector<double> level_map;
  int level_count = 12;
  /// Planar values drawn as a grey heatmap (paint density).
  std::vector<double> heatmap;
  std::vector<SvgPath> paths;
  std::vector<Vec2> sensors;
  Glyph glyph = Glyph::Camera;
  /// (origin, direction) pairs; directions are rescaled to a common length.
  std::vector<std::pair<Vec2, Vec2>> arrows;
  Vec2 seed{0.0, 0.0};
  Vec2 keypoint{0.0, 0.0};
};

std::string render_scene(const SvgScene& scene);

/// Stencil offsets as spokes from the node, one panel per control.
std::string render_stencil(const StencilDump& dump);

}  // namespace eikgame
