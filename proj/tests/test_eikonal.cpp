#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "eikgame/eikonal.hpp"

using namespace eikgame;

namespace {

Grid chain() {
  const std::vector<std::uint8_t> mask{0, 0, 0, 1, 1, 1};
  return Grid::from_mask({0.0, 0.0}, {3.0, 2.0}, 3, 2, 0, mask);
}

Grid strip(int nx) {
  GridSpec s;
  s.lower = {0.0, 0.0};
  s.upper = {2.0, 1.0};
  s.nx = nx;
  return Grid::build(s);
}

double euclid_error(int nx) {
  const Grid g = strip(nx);
  const std::vector<double> ones(g.size(), 1.0);
  const auto field = StencilField::isotropic(g, ones);
  const auto res = fast_march(field, seeds_at_point(g, {0.2, 0.5}));
  const Point s = g.point_of_index(g.snap({0.2, 0.5, 0.0}));
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Point p = g.point_of_index(g.unflat(n));
    err = std::max(err, std::abs(res.values[n] - std::hypot(p[0] - s[0], p[1] - s[1])));
  }
  return err;
}

}  // namespace

TEST_SUITE("eikonal") {
  TEST_CASE("local update roots") {
    CHECK(local_update({{{1.0, 0.0}}}) == doctest::Approx(1.0));
    CHECK(local_update({{{1.0, 0.0}, {1.0, 0.0}}}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(local_update({{{1.0, 0.0}, {1.0, 10.0}}}) == doctest::Approx(1.0));
    CHECK(local_update({{{1.0, kUnreached}}}) == kUnreached);
    // Two controls: the smaller root wins.
    CHECK(local_update({{{1.0, 3.0}}, {{4.0, 0.0}}}) == doctest::Approx(0.5));

    std::vector<WeightedValue> terms{{1.0, 10.0}, {1.0, 0.0}};
    int used = -1;
    CHECK(solve_control(terms, &used) == doctest::Approx(1.0));
    CHECK(used == 1);
  }

  TEST_CASE("one dimensional chain") {
    const Grid g = chain();
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), {{0, 0.0}});
    CHECK(res.values[0] == 0.0);
    CHECK(res.values[1] == doctest::Approx(1.0));
    CHECK(res.values[2] == doctest::Approx(2.0));
    CHECK(res.values[3] == kUnreached);
  }

  TEST_CASE("corner seed on a 3x3 block") {
    GridSpec s;
    s.upper = {3.0, 3.0};
    s.nx = 3;
    s.ny = 3;
    const Grid g = Grid::build(s);
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), {{0, 0.0}});
    CHECK(res.values[g.flat({1, 1, 0})] == doctest::Approx(1.0 + 1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("a wall isolates the far side") {
    GridSpec s;
    s.nx = 20;
    s.ny = 20;
    s.obstacles.push_back(BoxObstacle{{-1.0, 0.45}, {2.0, 0.55}});
    const Grid g = Grid::build(s);
    const std::vector<double> ones(g.size(), 1.0);
    const auto res = fast_march(StencilField::isotropic(g, ones), seeds_at_point(g, {0.5, 0.2}));
    CHECK(std::isfinite(res.values[g.flat({10, 2, 0})]));
    for (int j = 12; j < 20; ++j) {
      for (int i = 0; i < 20; ++i) {
        CHECK(res.values[g.flat({i, j, 0})] == kUnreached);
        CHECK_FALSE(res.accepted(g.flat({i, j, 0})));
      }
    }
  }

  TEST_CASE("invalid seeds") {
    GridSpec s;
    s.nx = 10;
    s.ny = 10;
    s.obstacles.push_back(BoxObstacle{{0.4, 0.4}, {0.6, 0.6}});
    const Grid g = Grid::build(s);
    const std::vector<double> ones(g.size(), 1.0);
    const auto f = StencilField::isotropic(g, ones);
    CHECK_THROWS_AS(fast_march(f, {{g.flat({5, 5, 0}), 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fast_march(f, {{g.size(), 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fast_march(f, {{0, NAN}}), std::invalid_argument);
  }

  TEST_CASE("causality and the local equation on the frozen graph") {
    GridSpec s;
    s.lower = {0.0, 0.0};
    s.upper = {2.0, 1.0};
    s.nx = 40;
    s.ny = 20;
    s.ntheta = 24;
    s.obstacles.push_back(DiscObstacle{{1.0, 0.5}, 0.2});
    const Grid g = Grid::build(s);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    std::vector<double> cost(g.size());
    for (auto& c : cost) c = u(rng);
    for (auto m : {MobilityModel::ReedsSheppForward, MobilityModel::Dubins}) {
      const auto f = StencilField::curvature(g, m, 0.3, 0.1, cost);
      const auto res = fast_march(f, seeds_at_point(g, {0.2, 0.5}));
      for (std::size_t k = 1; k < res.order.size(); ++k) {
        REQUIRE(res.values[res.order[k - 1]] <= res.values[res.order[k]]);
      }
      for (std::size_t pos = 0; pos < res.order.size(); ++pos) {
        if (res.is_seed[res.order[pos]]) continue;
        double sum = 0.0;
        for (const auto& e : res.edges_at(pos)) {
          CHECK(e.delta > 0.0);
          sum += e.weight * e.delta * e.delta;
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("raising the cost never lowers the value") {
    GridSpec s;
    s.lower = {0.0, 0.0};
    s.upper = {2.0, 1.0};
    s.nx = 60;
    s.obstacles.push_back(BoxObstacle{{0.55, 0.0}, {0.7, 0.4}});
    const Grid g = Grid::build(s);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::uniform_real_distribution<double> up(0.0, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> c1(g.size()), c2(g.size());
      for (std::size_t n = 0; n < g.size(); ++n) {
        c1[n] = u(rng);
        c2[n] = c1[n] * (1.0 + (trial % 2 ? up(rng) : 0.0) + (n % 7 == 0 ? up(rng) : 0.0));
      }
      const auto seeds = seeds_at_point(g, {0.2, 0.5});
      const auto r1 = fast_march(StencilField::isotropic(g, c1), seeds);
      const auto r2 = fast_march(StencilField::isotropic(g, c2), seeds);
      for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.masked(n)) continue;
        REQUIRE(r2.values[n] >= r1.values[n] - 1e-12 * r1.values[n]);
      }
    }
  }

  TEST_CASE("isotropic distance converges") {
    const double e1 = euclid_error(60);
    const double e2 = euclid_error(120);
    CHECK(e1 <= 5.0 * (2.0 / 60));
    CHECK(e2 <= 5.0 * (2.0 / 120));
    CHECK(e2 < e1);
  }

  TEST_CASE("constant riemannian metric") {
    const Grid g = strip(120);
    const Matrix2 m{{{1.0, 0.0}, {0.0, 4.0}}};
    const std::vector<Matrix2> metric(g.size(), m);
    const auto res = fast_march(StencilField::riemannian(g, metric), seeds_at_point(g, {0.2, 0.5}));
    const Point s = g.point_of_index(g.snap({0.2, 0.5, 0.0}));
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const Point p = g.point_of_index(g.unflat(n));
      const double dx = p[0] - s[0], dy = p[1] - s[1];
      err = std::max(err, std::abs(res.values[n] - std::sqrt(dx * dx + 4 * dy * dy)));
    }
    CHECK(err <= 10.0 * g.steps()[0]);
  }

  TEST_CASE("solve time grows near-linearly") {
    const auto best_time = [](int nx) {
      const Grid g = strip(nx);
      const std::vector<double> ones(g.size(), 1.0);
      const auto f = StencilField::isotropic(g, ones);
      const auto seeds = seeds_at_point(g, {0.2, 0.5});
      double best = INFINITY;
      for (int rep = 0; rep < 7; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = fast_march(f, seeds);
        const auto t1 = std::chrono::steady_clock::now();
        CHECK(res.order.size() == g.free_count());
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
      }
      return best;
    };
    const double t1 = best_time(400);
    const double t2 = best_time(566);
    CHECK(t2 / t1 <= 2.6);
  }
}
