#include "eikgame/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eikgame {

namespace {

// Relative mismatch tolerated between h_x and h_y. The 180 x 89 lattice over
// [0,2]x[0,1] differs by about 1.1%.
constexpr double kSquarePixelTolerance = 0.02;

}  // namespace

bool contains(const Obstacle& obstacle, Vec2 p) {
  return std::visit(
      [&](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, BoxObstacle>) {
          return p[0] >= o.lower[0] && p[0] <= o.upper[0] && p[1] >= o.lower[1] &&
                 p[1] <= o.upper[1];
        } else {
          const double dx = p[0] - o.center[0];
          const double dy = p[1] - o.center[1];
          return dx * dx + dy * dy <= o.radius * o.radius;
        }
      },
      obstacle);
}

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

Grid Grid::build(const GridSpec& spec) {
  const double width = spec.upper[0] - spec.lower[0];
  const double height = spec.upper[1] - spec.lower[1];
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("grid: rectangle must have positive extent");
  }
  if (spec.nx < 2) throw std::invalid_argument("grid: nx must be >= 2");
  int ny = spec.ny;
  if (ny == 0) ny = std::max(2, static_cast<int>(std::lround(height * spec.nx / width)));

  std::vector<std::uint8_t> planar(static_cast<std::size_t>(spec.nx) * ny, 0);
  const double hx = width / spec.nx;
  const double hy = height / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      const Vec2 c{spec.lower[0] + (i + 0.5) * hx, spec.lower[1] + (j + 0.5) * hy};
      for (const auto& o : spec.obstacles) {
        if (contains(o, c)) {
          planar[static_cast<std::size_t>(j) * spec.nx + i] = 1;
          break;
        }
      }
    }
  }
  return from_mask(spec.lower, spec.upper, spec.nx, ny, spec.ntheta, planar);
}

Grid Grid::from_mask(Vec2 lower, Vec2 upper, int nx, int ny, int ntheta,
                     std::span<const std::uint8_t> mask) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid: nx, ny must be >= 2");
  if (ntheta != 0 && ntheta < 4) throw std::invalid_argument("grid: ntheta must be >= 4");
  if (mask.size() != static_cast<std::size_t>(nx) * ny) {
    throw std::invalid_argument("grid: mask length " + std::to_string(mask.size()) +
                                " does not match dims");
  }
  const double width = upper[0] - lower[0];
  const double height = upper[1] - lower[1];
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("grid: rectangle must have positive extent");
  }
  Grid g;
  g.lower_ = lower;
  g.upper_ = upper;
  g.angular_ = ntheta > 0;
  g.dims_ = {nx, ny, g.angular_ ? ntheta : 1};
  g.steps_ = {width / nx, height / ny, g.angular_ ? kTwoPi / ntheta : 1.0};
  const double mismatch =
      std::abs(g.steps_[0] - g.steps_[1]) / std::max(g.steps_[0], g.steps_[1]);
  if (mismatch > kSquarePixelTolerance) {
    throw std::invalid_argument("grid: non-square pixels (h_x=" + std::to_string(g.steps_[0]) +
                                ", h_y=" + std::to_string(g.steps_[1]) + ")");
  }
  g.mask_.assign(g.size_for_dims(), 0);
  for (std::size_t k = 0; k < static_cast<std::size_t>(g.dims_[2]); ++k) {
    for (std::size_t p = 0; p < mask.size(); ++p) {
      g.mask_[k * mask.size() + p] = mask[p] != 0 ? 1 : 0;
    }
  }
  g.finalize();
  return g;
}

void Grid::finalize() {
  // A free cell without a free 4-neighbor cannot be reached; mask it so every
  // unmasked node keeps at least one unmasked neighbor.
  const int nx = dims_[0];
  const int ny = dims_[1];
  const std::size_t np = planar_size();
  std::vector<std::uint8_t> isolated(np, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t p = static_cast<std::size_t>(j) * nx + i;
      if (mask_[p]) continue;
      bool any = false;
      if (i > 0 && !mask_[p - 1]) any = true;
      if (i + 1 < nx && !mask_[p + 1]) any = true;
      if (j > 0 && !mask_[p - nx]) any = true;
      if (j + 1 < ny && !mask_[p + nx]) any = true;
      isolated[p] = any ? 0 : 1;
    }
  }
  free_count_ = 0;
  for (std::size_t n = 0; n < mask_.size(); ++n) {
    if (isolated[n % np]) mask_[n] = 1;
    if (!mask_[n]) ++free_count_;
  }
  if (free_count_ == 0) throw std::invalid_argument("grid: empty domain");
}

std::size_t Grid::size_for_dims() const {
  return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
}

bool Grid::in_range(const MultiIndex& idx) const {
  for (int a = 0; a < 3; ++a) {
    if (idx[a] < 0 || idx[a] >= dims_[a]) return false;
  }
  return true;
}

MultiIndex Grid::unflat(std::size_t flat) const {
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(flat % nx), static_cast<int>((flat / nx) % ny),
          static_cast<int>(flat / (nx * ny))};
}

bool Grid::shifted(const MultiIndex& idx, const MultiIndex& offset, MultiIndex& out) const {
  out[0] = idx[0] + offset[0];
  out[1] = idx[1] + offset[1];
  if (out[0] < 0 || out[0] >= dims_[0] || out[1] < 0 || out[1] >= dims_[1]) return false;
  if (angular_) {
    int k = (idx[2] + offset[2]) % dims_[2];
    if (k < 0) k += dims_[2];
    out[2] = k;
  } else {
    if (offset[2] != 0) return false;
    out[2] = 0;
  }
  return true;
}

Point Grid::point_of_index(const MultiIndex& idx) const {
  if (!in_range(idx)) throw std::out_of_range("grid: index out of range");
  return {lower_[0] + (idx[0] + 0.5) * steps_[0], lower_[1] + (idx[1] + 0.5) * steps_[1],
          angular_ ? (idx[2] + 0.5) * steps_[2] : 0.0};
}

bool Grid::inside_rectangle(Vec2 p) const {
  return p[0] >= lower_[0] && p[0] <= upper_[0] && p[1] >= lower_[1] && p[1] <= upper_[1];
}

MultiIndex Grid::locate(const Point& p) const {
  if (!inside_rectangle({p[0], p[1]})) throw std::out_of_range("grid: point outside rectangle");
  auto cell = [](double v, double lo, double h, int n) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / h)), 0, n - 1);
  };
  MultiIndex idx{cell(p[0], lower_[0], steps_[0], dims_[0]),
                 cell(p[1], lower_[1], steps_[1], dims_[1]), 0};
  if (angular_) {
    idx[2] = static_cast<int>(std::floor(wrap_angle(p[2]) / steps_[2])) % dims_[2];
  }
  return idx;
}

MultiIndex Grid::snap(const Point& p) const {
  const MultiIndex idx = locate(p);
  if (masked(flat(idx))) throw std::invalid_argument("grid: masked seed");
  return idx;
}

bool Grid::masked_at(Vec2 p) const {
  if (!inside_rectangle(p)) return false;
  const MultiIndex idx = locate({p[0], p[1], 0.0});
  return masked(flat({idx[0], idx[1], 0}));
}

}  // namespace eikgame
