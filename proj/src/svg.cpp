#include "eikgame/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace eikgame {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct Frame {
  Vec2 lower;
  Vec2 upper;
  double scale;
  double pad = 20.0;

  double width() const { return (upper[0] - lower[0]) * scale + 2 * pad; }
  double height() const { return (upper[1] - lower[1]) * scale + 2 * pad; }
  double x(double px) const { return pad + (px - lower[0]) * scale; }
  double y(double py) const { return pad + (upper[1] - py) * scale; }
};

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
}

Vec2 lerp_edge(Vec2 a, Vec2 b, double va, double vb, double level) {
  const double t = (level - va) / (vb - va);
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

}  // namespace

std::vector<Segment> contour_segments(const Grid& grid, std::span<const double> planar,
                                      double level) {
  std::vector<Segment> out;
  const int nx = grid.dims()[0];
  const int ny = grid.dims()[1];
  const auto center = [&](int i, int j) {
    const Point p = grid.point_of_index({i, j, 0});
    return Vec2{p[0], p[1]};
  };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      // Corners counter-clockwise from the lower left.
      const std::array<MultiIndex, 4> c{{{i, j, 0}, {i + 1, j, 0}, {i + 1, j + 1, 0}, {i, j + 1, 0}}};
      std::array<double, 4> v;
      std::array<Vec2, 4> p;
      bool finite = true;
      for (int k = 0; k < 4; ++k) {
        v[k] = planar[grid.flat(c[k])];
        p[k] = center(c[k][0], c[k][1]);
        finite = finite && std::isfinite(v[k]);
      }
      if (!finite) continue;
      int mask = 0;
      for (int k = 0; k < 4; ++k) mask |= (v[k] >= level ? 1 : 0) << k;
      if (mask == 0 || mask == 15) continue;
      const auto edge = [&](int e) {
        const int a = e;
        const int b = (e + 1) % 4;
        return lerp_edge(p[a], p[b], v[a], v[b], level);
      };
      // Edge e joins corner e and corner e+1.
      std::vector<std::array<int, 2>> pairs;
      switch (mask) {
        case 1: case 14: pairs = {{3, 0}}; break;
        case 2: case 13: pairs = {{0, 1}}; break;
        case 3: case 12: pairs = {{3, 1}}; break;
        case 4: case 11: pairs = {{1, 2}}; break;
        case 6: case 9: pairs = {{0, 2}}; break;
        case 7: case 8: pairs = {{2, 3}}; break;
        case 5: case 10: {
          const double mean = 0.25 * (v[0] + v[1] + v[2] + v[3]);
          const bool center_high = mean >= level;
          if ((mask == 5) == center_high) {
            pairs = {{3, 2}, {0, 1}};
          } else {
            pairs = {{3, 0}, {1, 2}};
          }
          break;
        }
        default: break;
      }
      for (const auto& pr : pairs) out.push_back({edge(pr[0]), edge(pr[1])});
    }
  }
  return out;
}

std::string render_scene(const SvgScene& scene) {
  const Grid& grid = *scene.grid;
  Frame f{grid.lower(), grid.upper(), 400.0 / (grid.upper()[1] - grid.lower()[1])};
  std::string s = header(f.width(), f.height());
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(f.width()) + "\" height=\"" + num(f.height()) +
       "\" fill=\"white\"/>\n";
  if (!scene.title.empty()) {
    s += "<title>" + scene.title + "</title>\n";
  }
  const int nx = grid.dims()[0];
  const int ny = grid.dims()[1];
  const double hx = grid.steps()[0] * f.scale;
  const double hy = grid.steps()[1] * f.scale;

  const auto cell_rect = [&](int i, int j, const std::string& fill) {
    const Point p = grid.point_of_index({i, j, 0});
    return "<rect x=\"" + num(f.x(p[0]) - hx / 2) + "\" y=\"" + num(f.y(p[1]) - hy / 2) +
           "\" width=\"" + num(hx) + "\" height=\"" + num(hy) + "\" fill=\"" + fill + "\"/>\n";
  };

  if (!scene.heatmap.empty()) {
    double lo = kUnreached, hi = -kUnreached;
    for (double v : scene.heatmap) {
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    s += "<g shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double v = scene.heatmap[grid.flat({i, j, 0})];
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        const int g = static_cast<int>(std::lround(255 - 155 * t));
        s += cell_rect(i, j, "rgb(" + std::to_string(g) + "," + std::to_string(g) + ",255)");
      }
    }
    s += "</g>\n";
  }

  s += "<g shape-rendering=\"crispEdges\" fill=\"#444\">\n";
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (grid.masked(grid.flat({i, j, 0}))) s += cell_rect(i, j, "#444");
    }
  }
  s += "</g>\n";

  if (!scene.level_map.empty() && scene.level_count > 0) {
    double lo = kUnreached, hi = -kUnreached;
    for (double v : scene.level_map) {
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    s += "<g stroke=\"#2a7\" stroke-width=\"0.8\" fill=\"none\">\n";
    for (int l = 1; l <= scene.level_count && hi > lo; ++l) {
      const double level = lo + (hi - lo) * l / (scene.level_count + 1);
      for (const auto& seg : contour_segments(grid, scene.level_map, level)) {
        s += "<line x1=\"" + num(f.x(seg[0][0])) + "\" y1=\"" + num(f.y(seg[0][1])) + "\" x2=\"" +
             num(f.x(seg[1][0])) + "\" y2=\"" + num(f.y(seg[1][1])) + "\"/>\n";
      }
    }
    s += "</g>\n";
  }

  for (const auto& sp : scene.paths) {
    s += "<polyline fill=\"none\" stroke=\"" + sp.color + "\" stroke-width=\"2\" points=\"";
    for (const auto& q : sp.path.points) s += num(f.x(q[0])) + "," + num(f.y(q[1])) + " ";
    s += "\"/>\n";
  }

  if (!scene.arrows.empty()) {
    double longest = 0.0;
    for (const auto& a : scene.arrows) longest = std::max(longest, std::hypot(a.second[0], a.second[1]));
    const double len = 0.1 * f.scale;
    s += "<g stroke=\"#0a0\" stroke-width=\"2\">\n";
    for (const auto& [o, d] : scene.arrows) {
      if (!(longest > 0.0)) break;
      const double k = len / longest;
      const double x0 = f.x(o[0]), y0 = f.y(o[1]);
      const double x1 = x0 + k * d[0], y1 = y0 - k * d[1];
      s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
           num(y1) + "\"/>\n";
      s += "<circle cx=\"" + num(x1) + "\" cy=\"" + num(y1) + "\" r=\"2.5\" fill=\"#0a0\"/>\n";
    }
    s += "</g>\n";
  }

  for (const auto& q : scene.sensors) {
    const double x = f.x(q[0]), y = f.y(q[1]);
    if (scene.glyph == Glyph::Camera) {
      s += "<rect x=\"" + num(x - 5) + "\" y=\"" + num(y - 5) +
           "\" width=\"10\" height=\"10\" fill=\"#d22\" stroke=\"black\"/>\n";
    } else {
      s += "<polygon points=\"" + num(x) + "," + num(y - 7) + " " + num(x - 6) + "," + num(y + 5) +
           " " + num(x + 6) + "," + num(y + 5) + "\" fill=\"#d22\" stroke=\"black\"/>\n";
    }
  }
  s += "<circle cx=\"" + num(f.x(scene.seed[0])) + "\" cy=\"" + num(f.y(scene.seed[1])) +
       "\" r=\"5\" fill=\"#23c\"/>\n";
  s += "<circle cx=\"" + num(f.x(scene.keypoint[0])) + "\" cy=\"" + num(f.y(scene.keypoint[1])) +
       "\" r=\"5\" fill=\"#c3c\"/>\n";
  s += "<rect x=\"" + num(f.pad) + "\" y=\"" + num(f.pad) + "\" width=\"" +
       num(f.width() - 2 * f.pad) + "\" height=\"" + num(f.height() - 2 * f.pad) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "</svg>\n";
  return s;
}

std::string render_stencil(const StencilDump& dump) {
  const std::size_t panels = std::max<std::size_t>(1, dump.stencil.controls.size());
  int reach = 1;
  for (const auto& c : dump.stencil.controls) {
    for (const auto& e : c.entries) reach = std::max({reach, std::abs(e.offset[0]), std::abs(e.offset[1])});
  }
  const double cell = 260.0 / (2 * reach + 1);
  const double size = 300.0;
  std::string s = header(size * static_cast<double>(panels), size);
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(size * static_cast<double>(panels)) +
       "\" height=\"" + num(size) + "\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < dump.stencil.controls.size(); ++c) {
    const double cx = size * (static_cast<double>(c) + 0.5);
    const double cy = size / 2;
    s += "<g stroke=\"#ddd\">\n";
    for (int k = -reach; k <= reach; ++k) {
      s += "<line x1=\"" + num(cx + k * cell) + "\" y1=\"" + num(cy - reach * cell) + "\" x2=\"" +
           num(cx + k * cell) + "\" y2=\"" + num(cy + reach * cell) + "\"/>\n";
      s += "<line x1=\"" + num(cx - reach * cell) + "\" y1=\"" + num(cy + k * cell) + "\" x2=\"" +
           num(cx + reach * cell) + "\" y2=\"" + num(cy + k * cell) + "\"/>\n";
    }
    s += "</g>\n";
    const auto& entries = dump.stencil.controls[c].entries;
    double wmax = 0.0;
    for (const auto& e : entries) wmax = std::max(wmax, e.weight);
    for (const auto& e : entries) {
      const double x = cx + e.offset[0] * cell;
      const double y = cy - e.offset[1] * cell;
      // Angular component shown by colour: red forward, blue backward.
      const std::string color = e.offset[2] > 0 ? "#c22" : e.offset[2] < 0 ? "#22c" : "#222";
      const double r = 2.0 + 5.0 * std::sqrt(wmax > 0 ? e.weight / wmax : 0.0);
      s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(cy) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y) +
           "\" stroke=\"" + color + "\"/>\n";
      s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + color +
           "\"/>\n";
    }
    s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"3\" fill=\"#0a0\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace eikgame
