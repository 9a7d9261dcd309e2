#include "eikgame/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eikgame {

namespace {

constexpr double kStep = 0.5;  // index units

struct Corner {
  std::size_t node;
  double weight;
};

// Multilinear interpolation stencil at a continuous index position.
int corners(const Grid& g, const std::array<double, 3>& q, Corner out[8]) {
  const auto& d = g.dims();
  int lo[3];
  double t[3];
  for (int a = 0; a < 2; ++a) {
    const int f = static_cast<int>(std::floor(q[a]));
    lo[a] = std::clamp(f, 0, d[a] - 2);
    t[a] = std::clamp(q[a] - lo[a], 0.0, 1.0);
  }
  int n_axes = 2;
  if (g.has_angle()) {
    const double f = std::floor(q[2]);
    lo[2] = ((static_cast<int>(f) % d[2]) + d[2]) % d[2];
    t[2] = q[2] - f;
    n_axes = 3;
  } else {
    lo[2] = 0;
    t[2] = 0.0;
  }
  int count = 0;
  for (int c = 0; c < (1 << n_axes); ++c) {
    MultiIndex idx{lo[0] + (c & 1), lo[1] + ((c >> 1) & 1), 0};
    double w = ((c & 1) ? t[0] : 1.0 - t[0]) * (((c >> 1) & 1) ? t[1] : 1.0 - t[1]);
    if (n_axes == 3) {
      idx[2] = (lo[2] + ((c >> 2) & 1)) % d[2];
      w *= ((c >> 2) & 1) ? t[2] : 1.0 - t[2];
    }
    out[count++] = {g.flat(idx), w};
  }
  return count;
}

bool node_direction(const SolveResult& res, std::size_t x, std::array<double, 3>& dir) {
  if (!res.accepted(x) || res.is_seed[x]) return false;
  double s = 0.0;
  dir = {0.0, 0.0, 0.0};
  for (const auto& e : res.edges_of(x)) {
    const double om = e.omega();
    for (int a = 0; a < 3; ++a) dir[a] -= om * e.offset[a];
    s += om;
  }
  if (!(s > 0.0)) return false;
  for (auto& v : dir) v /= s;
  return true;
}

Point to_physical(const Grid& g, const std::array<double, 3>& q) {
  const auto& h = g.steps();
  return {g.lower()[0] + (q[0] + 0.5) * h[0], g.lower()[1] + (q[1] + 0.5) * h[1],
          g.has_angle() ? wrap_angle((q[2] + 0.5) * h[2]) : 0.0};
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double vx = b[0] - a[0];
  const double vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2, 0.0, 1.0);
  const double dx = a[0] + t * vx - p[0];
  const double dy = a[1] + t * vy - p[1];
  return std::sqrt(dx * dx + dy * dy);
}

double directed_hausdorff(const Path& a, const Path& b) {
  double worst = 0.0;
  for (const auto& p : a.points) {
    double best = kUnreached;
    if (b.points.size() == 1) best = segment_distance(p, b.points[0], b.points[0]);
    for (std::size_t i = 0; i + 1 < b.points.size(); ++i) {
      best = std::min(best, segment_distance(p, b.points[i], b.points[i + 1]));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double Path::planar_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    len += std::hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
  }
  return len;
}

Path Path::reversed() const {
  Path out = *this;
  std::reverse(out.points.begin(), out.points.end());
  std::reverse(out.cumulative_cost.begin(), out.cumulative_cost.end());
  if (!out.cumulative_cost.empty()) {
    const double total = out.cumulative_cost.front();
    for (auto& c : out.cumulative_cost) c = total - c;
  }
  return out;
}

double interpolate_value(const SolveResult& res, const Grid& grid, const std::array<double, 3>& q) {
  Corner cs[8];
  const int n = corners(grid, q, cs);
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = res.values[cs[i].node];
    if (v < kUnreached && cs[i].weight > 0.0) {
      num += cs[i].weight * v;
      den += cs[i].weight;
    }
  }
  return den > 0.0 ? num / den : kUnreached;
}

Path trace(const SolveResult& res, const Grid& grid, std::size_t start) {
  if (start >= res.values.size() || !res.accepted(start) || !(res.values[start] < kUnreached)) {
    throw std::invalid_argument("geodesic: start unreached");
  }
  Path path;
  path.angular = grid.has_angle();
  const MultiIndex si = grid.unflat(start);
  std::array<double, 3> q{static_cast<double>(si[0]), static_cast<double>(si[1]),
                          static_cast<double>(si[2])};
  const double u0 = res.values[start];
  path.points.push_back(grid.point_of_index(si));
  path.cumulative_cost.push_back(0.0);
  if (res.is_seed[start]) return path;

  std::vector<std::array<double, 2>> seed_cells;
  for (const auto& s : res.seeds) {
    const MultiIndex idx = grid.unflat(s.node);
    seed_cells.push_back({static_cast<double>(idx[0]), static_cast<double>(idx[1])});
  }
  auto near_seed = [&](const std::array<double, 3>& p, std::size_t& which) {
    for (std::size_t i = 0; i < seed_cells.size(); ++i) {
      if (std::hypot(p[0] - seed_cells[i][0], p[1] - seed_cells[i][1]) <= 1.0) {
        which = i;
        return true;
      }
    }
    return false;
  };

  const auto& d = grid.dims();
  const int budget = static_cast<int>(10.0 * (d[0] + d[1] + (grid.has_angle() ? d[2] : 0)) / kStep);
  for (int iter = 0; iter < budget; ++iter) {
    std::size_t which = 0;
    if (near_seed(q, which)) {
      const std::size_t sn = res.seeds[which].node;
      MultiIndex sidx = grid.unflat(sn);
      Point end = grid.point_of_index(sidx);
      if (grid.has_angle()) end[2] = path.points.back()[2];
      path.points.push_back(end);
      path.cumulative_cost.push_back(u0 - res.values[sn]);
      return path;
    }
    Corner cs[8];
    const int n = corners(grid, q, cs);
    std::array<double, 3> dir{0.0, 0.0, 0.0};
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      std::array<double, 3> nd;
      if (cs[i].weight > 0.0 && node_direction(res, cs[i].node, nd)) {
        for (int a = 0; a < 3; ++a) dir[a] += cs[i].weight * nd[a];
        wsum += cs[i].weight;
      }
    }
    if (wsum == 0.0) {
      // Fall back to the nearest node's direction.
      MultiIndex near{static_cast<int>(std::lround(q[0])), static_cast<int>(std::lround(q[1])), 0};
      near[0] = std::clamp(near[0], 0, d[0] - 1);
      near[1] = std::clamp(near[1], 0, d[1] - 1);
      if (grid.has_angle()) near[2] = ((static_cast<int>(std::lround(q[2])) % d[2]) + d[2]) % d[2];
      if (!node_direction(res, grid.flat(near), dir)) {
        throw std::runtime_error("geodesic: descent left the reached region");
      }
    }
    const double norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    if (!(norm > 0.0)) throw std::runtime_error("geodesic: vanishing descent direction");
    for (int a = 0; a < 3; ++a) q[a] += kStep * dir[a] / norm;
    q[0] = std::clamp(q[0], 0.0, d[0] - 1.0);
    q[1] = std::clamp(q[1], 0.0, d[1] - 1.0);
    path.points.push_back(to_physical(grid, q));
    const double u = interpolate_value(res, grid, q);
    path.cumulative_cost.push_back(u < kUnreached ? u0 - u : path.cumulative_cost.back());
  }
  throw std::runtime_error("geodesic: iteration budget exhausted");
}

std::vector<double> discrete_curvature(const Path& path, double spacing) {
  if (path.points.size() < 3) throw std::invalid_argument("geodesic: curvature needs >= 3 vertices");
  if (!(spacing > 0.0)) throw std::invalid_argument("geodesic: spacing must be positive");
  // Arc-length resampling of the planar projection.
  std::vector<std::array<double, 2>> samples;
  samples.push_back({path.points[0][0], path.points[0][1]});
  double carried = 0.0;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const double ax = path.points[i - 1][0];
    const double ay = path.points[i - 1][1];
    const double bx = path.points[i][0];
    const double by = path.points[i][1];
    const double len = std::hypot(bx - ax, by - ay);
    if (len <= 0.0) continue;
    double s = spacing - carried;
    while (s <= len) {
      samples.push_back({ax + (bx - ax) * s / len, ay + (by - ay) * s / len});
      s += spacing;
    }
    carried = len - (s - spacing);
  }
  std::vector<double> kappa;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    const auto& c = samples[i + 1];
    const double ab = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double bc = std::hypot(c[0] - b[0], c[1] - b[1]);
    const double ca = std::hypot(a[0] - c[0], a[1] - c[1]);
    if (ab < 1e-12 * spacing || bc < 1e-12 * spacing || ca < 1e-12 * spacing) continue;
    const double area2 = std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
    kappa.push_back(2.0 * area2 / (ab * bc * ca));
  }
  return kappa;
}

double hausdorff_distance(const Path& a, const Path& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace eikgame
