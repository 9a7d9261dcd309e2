#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "eikgame/grid.hpp"

using namespace eikgame;

namespace {

GridSpec strip(int nx, int ny, int ntheta = 0) {
  GridSpec s;
  s.lower = {0.0, 0.0};
  s.upper = {2.0, 1.0};
  s.nx = nx;
  s.ny = ny;
  s.ntheta = ntheta;
  return s;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("node counts of the reference strip") {
    const Grid g = Grid::build(strip(180, 89));
    CHECK(g.size() == 16020);
    CHECK(g.free_count() == 16020);
    CHECK_FALSE(g.has_angle());

    const Grid a = Grid::build(strip(180, 89, 60));
    CHECK(a.dims() == std::array<int, 3>{180, 89, 60});
    CHECK(a.steps()[2] == doctest::Approx(2 * kPi / 60).epsilon(1e-15));
    CHECK(a.size() == 16020u * 60u);
  }

  TEST_CASE("auto ny keeps square pixels") {
    const Grid g = Grid::build(strip(180, 0));
    CHECK(g.dims()[1] == 90);
  }

  TEST_CASE("fully covered square is rejected") {
    GridSpec s;
    s.nx = 2;
    s.ny = 2;
    s.obstacles.push_back(BoxObstacle{{-1.0, -1.0}, {2.0, 2.0}});
    CHECK_THROWS_WITH_AS(Grid::build(s), doctest::Contains("empty domain"), std::invalid_argument);
  }

  TEST_CASE("non-square pixels are rejected") {
    CHECK_THROWS_AS(Grid::build(strip(180, 40)), std::invalid_argument);
  }

  TEST_CASE("cell centers") {
    const Grid g = Grid::build(strip(180, 89));
    const Point p = g.point_of_index({0, 0, 0});
    CHECK(p[0] == doctest::Approx(1.0 / 180.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.5 / 89.0).epsilon(1e-14));
    CHECK_THROWS_AS(g.point_of_index({180, 0, 0}), std::out_of_range);
    CHECK_THROWS_AS(g.point_of_index({0, -1, 0}), std::out_of_range);

    const Grid a = Grid::build(strip(8, 4, 4));
    CHECK(a.point_of_index({0, 0, 0})[2] == doctest::Approx(kPi / 4));
  }

  TEST_CASE("snap locates seeds and round trips centers") {
    const Grid g = Grid::build(strip(180, 89));
    const MultiIndex s = g.snap({0.2, 0.5, 0.0});
    const Point c = g.point_of_index(s);
    CHECK(std::abs(c[0] - 0.2) <= 0.5 * g.steps()[0] + 1e-12);
    CHECK(std::abs(c[1] - 0.5) <= 0.5 * g.steps()[1] + 1e-12);

    for (int j = 0; j < 89; j += 7) {
      for (int i = 0; i < 180; i += 11) {
        const MultiIndex idx{i, j, 0};
        CHECK(g.snap(g.point_of_index(idx)) == idx);
      }
    }
    CHECK_THROWS_AS(g.snap({2.5, 0.5, 0.0}), std::out_of_range);
  }

  TEST_CASE("snap into an obstacle is a masked seed") {
    GridSpec s = strip(40, 20);
    s.obstacles.push_back(DiscObstacle{{1.0, 0.5}, 0.2});
    const Grid g = Grid::build(s);
    CHECK_THROWS_WITH_AS(g.snap({1.0, 0.5, 0.0}), doctest::Contains("masked seed"),
                         std::invalid_argument);
    CHECK_NOTHROW(g.locate({1.0, 0.5, 0.0}));
  }

  TEST_CASE("angular wrap") {
    const Grid g = Grid::build(strip(20, 10, 12));
    for (int t = 0; t < 50; ++t) {
      const double th = -7.0 + 0.29 * t;
      CHECK(g.snap({0.5, 0.5, th}) == g.snap({0.5, 0.5, th + 2 * kPi}));
    }
    CHECK(wrap_angle(-0.5) == doctest::Approx(2 * kPi - 0.5));
    MultiIndex out{};
    REQUIRE(g.shifted({3, 3, 0}, {0, 0, -1}, out));
    CHECK(out[2] == 11);
    CHECK_FALSE(g.shifted({0, 3, 0}, {-1, 0, 0}, out));
  }

  TEST_CASE("mask is extruded along the angle") {
    GridSpec s = strip(30, 15, 8);
    s.obstacles.push_back(BoxObstacle{{0.5, 0.0}, {0.8, 0.6}});
    const Grid g = Grid::build(s);
    for (std::size_t n = 0; n < g.size(); ++n) {
      CHECK(g.masked(n) == g.masked(g.planar_index(n)));
    }
    CHECK(g.free_count() % 8 == 0);
    CHECK(g.masked_at({0.6, 0.3}));
    CHECK_FALSE(g.masked_at({0.2, 0.3}));
  }
}
