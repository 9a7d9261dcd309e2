#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace eikgame {

using Vec2 = std::array<double, 2>;

/// Physical point (x, y, theta). theta is ignored on planar grids.
using Point = std::array<double, 3>;

/// Integer lattice coordinates (i, j, k). k is always 0 on planar grids.
using MultiIndex = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct BoxObstacle {
  Vec2 lower;
  Vec2 upper;
};

struct DiscObstacle {
  Vec2 center;
  double radius = 0.0;
};

using Obstacle = std::variant<BoxObstacle, DiscObstacle>;

bool contains(const Obstacle& obstacle, Vec2 p);

struct GridSpec {
  Vec2 lower{0.0, 0.0};
  Vec2 upper{1.0, 1.0};
  int nx = 2;
  /// 0 selects the square-pixel resolution round(height / h_x).
  int ny = 0;
  /// 0 means no angular axis.
  int ntheta = 0;
  std::vector<Obstacle> obstacles;
};

/// Rectangular lattice over R^2 or R^2 x S^1 with cell-centered nodes.
///
/// Nodes are flattened as i + nx * (j + ny * k), so the planar footprint
/// index of a node is its flat index modulo nx * ny. Only the angular axis
/// is periodic. The obstacle mask is extruded along the angular axis.
class Grid {
 public:
  /// Throws std::invalid_argument on non-square pixels, bad resolutions or an
  /// empty unmasked set.
  static Grid build(const GridSpec& spec);

  /// Builds from a row-major planar mask (0 = free, 1 = masked), extruded
  /// over `ntheta` angular cells when ntheta > 0.
  static Grid from_mask(Vec2 lower, Vec2 upper, int nx, int ny, int ntheta,
                        std::span<const std::uint8_t> mask);

  bool has_angle() const { return angular_; }
  int dimension() const { return angular_ ? 3 : 2; }
  const std::array<int, 3>& dims() const { return dims_; }
  const std::array<double, 3>& steps() const { return steps_; }
  Vec2 lower() const { return lower_; }
  Vec2 upper() const { return upper_; }

  std::size_t size() const { return mask_.size(); }
  std::size_t planar_size() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1];
  }
  std::size_t planar_index(std::size_t flat) const { return flat % planar_size(); }
  std::size_t free_count() const { return free_count_; }

  bool masked(std::size_t flat) const { return mask_[flat] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  bool in_range(const MultiIndex& idx) const;
  std::size_t flat(const MultiIndex& idx) const {
    return static_cast<std::size_t>(idx[0]) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(idx[1]) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(idx[2]));
  }
  MultiIndex unflat(std::size_t flat) const;

  /// Node reached from `idx` by `offset`, wrapping the angular component.
  /// Returns false when the spatial part leaves the rectangle.
  bool shifted(const MultiIndex& idx, const MultiIndex& offset, MultiIndex& out) const;

  /// Cell-center coordinate; throws std::out_of_range for bad indices.
  Point point_of_index(const MultiIndex& idx) const;

  /// Index of the cell containing `p` (nearest cell center). Throws
  /// std::out_of_range outside the rectangle and std::invalid_argument
  /// ("masked seed") when that cell is masked.
  MultiIndex snap(const Point& p) const;

  /// Like snap but never throws on masked cells.
  MultiIndex locate(const Point& p) const;

  bool inside_rectangle(Vec2 p) const;

  /// Whether the planar point lies in a masked cell (false outside).
  bool masked_at(Vec2 p) const;

 private:
  Grid() = default;
  void finalize();
  std::size_t size_for_dims() const;

  std::array<int, 3> dims_{1, 1, 1};
  std::array<double, 3> steps_{1.0, 1.0, 1.0};
  Vec2 lower_{0.0, 0.0};
  Vec2 upper_{1.0, 1.0};
  bool angular_ = false;
  std::vector<std::uint8_t> mask_;
  std::size_t free_count_ = 0;
};

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double theta);

}  // namespace eikgame
