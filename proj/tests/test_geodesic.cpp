#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eikgame/geodesic.hpp"

using namespace eikgame;

namespace {

Grid strip(int nx) {
  GridSpec s;
  s.lower = {0.0, 0.0};
  s.upper = {2.0, 1.0};
  s.nx = nx;
  return Grid::build(s);
}

Path polyline(Vec2 a, Vec2 b, int n) {
  Path p;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    p.points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0});
    p.cumulative_cost.push_back(0.0);
  }
  return p;
}

double smooth_cost(double x, double y) { return 1.0 + 0.4 * std::sin(2.0 * x) * std::cos(3.0 * y); }

}  // namespace

TEST_SUITE("geodesic") {
  TEST_CASE("unit cost paths are straight") {
    const Grid g = strip(90);
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), seeds_at_point(g, {0.2, 0.5}));
    const double h = g.steps()[0];
    for (const Vec2 t : {Vec2{1.8, 0.5}, Vec2{1.5, 0.1}, Vec2{0.9, 0.95}, Vec2{0.25, 0.1}}) {
      const std::size_t start = g.flat(g.snap({t[0], t[1], 0.0}));
      const Path p = trace(res, g, start);
      const Point a = p.points.front();
      const Point b = g.point_of_index(g.snap({0.2, 0.5, 0.0}));
      CHECK(hausdorff_distance(p, polyline({a[0], a[1]}, {b[0], b[1]}, 400)) <= 2.0 * h);
      for (std::size_t k = 1; k < p.size(); ++k) {
        CHECK(p.cumulative_cost[k] >= p.cumulative_cost[k - 1] - 1e-12);
      }
      CHECK(p.cumulative_cost.back() == doctest::Approx(res.values[start]));
    }
  }

  TEST_CASE("starting on the seed") {
    const Grid g = strip(40);
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), seeds_at_point(g, {0.2, 0.5}));
    const Path p = trace(res, g, g.flat(g.snap({0.2, 0.5, 0.0})));
    CHECK(p.size() == 1);
    CHECK(p.cumulative_cost[0] == 0.0);
  }

  TEST_CASE("unreached start") {
    GridSpec s;
    s.nx = 20;
    s.ny = 20;
    s.obstacles.push_back(BoxObstacle{{0.45, -1.0}, {0.55, 2.0}});
    const Grid g = Grid::build(s);
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), seeds_at_point(g, {0.2, 0.5}));
    CHECK_THROWS_WITH_AS(trace(res, g, g.flat({18, 10, 0})), doctest::Contains("unreached"),
                         std::invalid_argument);
  }

  TEST_CASE("curvature estimates") {
    Path circle;
    const double r = 0.4;
    for (int k = 0; k <= 300; ++k) {
      const double a = 1.5 * kPi * k / 300;
      circle.points.push_back({r * std::cos(a), r * std::sin(a), 0.0});
    }
    for (double kappa : discrete_curvature(circle, 0.02)) {
      CHECK(kappa == doctest::Approx(1.0 / r).epsilon(0.05));
    }
    const Path line = polyline({0.0, 0.0}, {1.0, 0.5}, 50);
    for (double kappa : discrete_curvature(line, 0.02)) CHECK(kappa == doctest::Approx(0.0));

    CHECK_THROWS_AS(discrete_curvature(polyline({0.0, 0.0}, {1.0, 0.0}, 1), 0.02),
                    std::invalid_argument);
  }

  TEST_CASE("path cost matches the value drop") {
    const Grid g = strip(120);
    std::vector<double> cost(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
      const Point p = g.point_of_index(g.unflat(n));
      cost[n] = smooth_cost(p[0], p[1]);
    }
    const auto res = fast_march(StencilField::isotropic(g, cost), seeds_at_point(g, {0.2, 0.5}));
    for (const Vec2 t : {Vec2{1.8, 0.5}, Vec2{1.2, 0.9}, Vec2{0.6, 0.1}}) {
      const std::size_t start = g.flat(g.snap({t[0], t[1], 0.0}));
      const Path p = trace(res, g, start);
      double integral = 0.0;
      for (std::size_t k = 1; k < p.size(); ++k) {
        const double mx = 0.5 * (p.points[k][0] + p.points[k - 1][0]);
        const double my = 0.5 * (p.points[k][1] + p.points[k - 1][1]);
        integral += std::hypot(p.points[k][0] - p.points[k - 1][0], p.points[k][1] - p.points[k - 1][1]) *
                    smooth_cost(mx, my);
      }
      CHECK(integral == doctest::Approx(p.cumulative_cost.back()).epsilon(0.05));
    }
  }

  TEST_CASE("reversal and length") {
    const Path p = polyline({0.0, 0.0}, {0.3, 0.4}, 10);
    CHECK(p.planar_length() == doctest::Approx(0.5));
    const Path r = p.reversed();
    CHECK(r.points.front() == p.points.back());
    CHECK(hausdorff_distance(p, r) == doctest::Approx(0.0));
  }
}
