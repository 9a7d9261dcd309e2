#include <doctest.h>

#include <cmath>
#include <random>

#include "eikgame/error.hpp"
#include "eikgame/games.hpp"
#include "eikgame/optimize.hpp"
#include "oracles.hpp"

using namespace eikgame;

namespace {

AscentConfig box(std::size_t n, double lo, double hi) {
  AscentConfig c;
  c.lower.assign(n, lo);
  c.upper.assign(n, hi);
  return c;
}

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("concave quadratic peak") {
    const std::vector<double> peak{0.3, -0.7, 1.2};
    const Objective f = [&](std::span<const double> x) {
      double v = 0.0;
      std::vector<double> g(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        v -= (x[i] - peak[i]) * (x[i] - peak[i]);
        g[i] = -2.0 * (x[i] - peak[i]);
      }
      return std::pair{v, g};
    };
    const auto res = maximize(f, {0.0, 0.0, 0.0}, box(3, -5.0, 5.0));
    for (std::size_t i = 0; i < 3; ++i) CHECK(res.x[i] == doctest::Approx(peak[i]).epsilon(1e-6));
    CHECK(res.stop == AscentStop::Converged);
  }

  TEST_CASE("linear objective stops on the bound") {
    const Objective f = [](std::span<const double> x) {
      return std::pair{x[0], std::vector<double>{1.0}};
    };
    const auto res = maximize(f, {0.5}, box(1, 0.0, 1.0));
    CHECK(res.x[0] == 1.0);
    CHECK(res.value == 1.0);
  }

  TEST_CASE("random positive definite systems") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 8;
      std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
      std::vector<std::vector<double>> r(n, std::vector<double>(n));
      for (auto& row : r) {
        for (auto& v : row) v = u(rng);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t k = 0; k < n; ++k) a[i][j] += r[i][k] * r[j][k];
        }
        a[i][i] += 0.5;
      }
      std::vector<double> b(n);
      for (auto& v : b) v = u(rng);
      const auto want = oracle::cholesky_solve(a, b);

      const Objective f = [&](std::span<const double> x) {
        std::vector<double> g(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double ax = 0.0;
          for (std::size_t j = 0; j < n; ++j) ax += a[i][j] * x[j];
          v += -0.5 * x[i] * ax + b[i] * x[i];
          g[i] = b[i] - ax;
        }
        return std::pair{v, g};
      };
      AscentConfig cfg = box(n, -100.0, 100.0);
      cfg.max_iterations = 500;
      const auto res = maximize(f, std::vector<double>(n, 0.0), cfg);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(res.x[i] - want[i]) <= 1e-6 * std::max(1.0, std::abs(want[i])));
      }
    }
  }

  TEST_CASE("history is monotone and iterates feasible") {
    const std::vector<double> lo(4, 0.0), hi(4, 1.0);
    const Objective f = [&](std::span<const double> x) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        REQUIRE(x[i] >= lo[i]);
        REQUIRE(x[i] <= hi[i]);
      }
      double v = 0.0;
      std::vector<double> g(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        v += std::log(0.1 + x[i]) - 0.8 * x[i] * x[i] * (i + 1);
        g[i] = 1.0 / (0.1 + x[i]) - 1.6 * x[i] * (i + 1);
      }
      return std::pair{v, g};
    };
    const auto res = maximize(f, {0.9, 0.1, 0.5, 0.0}, box(4, 0.0, 1.0));
    for (std::size_t k = 1; k < res.history.size(); ++k) {
      CHECK(res.history[k].value >= res.history[k - 1].value);
    }
    CHECK(res.history.back().gradient_norm <= 1e-3 * res.history.front().gradient_norm);
  }

  TEST_CASE("inadmissible points are backed off from") {
    const Objective f = [](std::span<const double> x) {
      if (x[0] > 0.6) return std::pair{std::nan(""), std::vector<double>{0.0}};
      return std::pair{x[0], std::vector<double>{1.0}};
    };
    AscentConfig cfg = box(1, 0.0, 1.0);
    cfg.max_iterations = 5;
    const auto res = maximize(f, {0.0}, cfg);
    CHECK(res.x[0] <= 0.6);
    CHECK(res.x[0] > 0.0);
  }

  TEST_CASE("invalid inputs") {
    const Objective f = [](std::span<const double> x) {
      return std::pair{x[0], std::vector<double>{1.0}};
    };
    CHECK_THROWS_AS(maximize(f, {2.0}, box(1, 0.0, 1.0)), std::invalid_argument);
    const Objective bad = [](std::span<const double>) {
      return std::pair{std::nan(""), std::vector<double>{0.0}};
    };
    CHECK_THROWS_AS(maximize(bad, {0.5}, box(1, 0.0, 1.0)), NumericalError);
    AscentConfig cfg = box(1, 0.0, 1.0);
    cfg.memory = 0;
    CHECK_THROWS_AS(maximize(f, {0.5}, cfg), std::invalid_argument);
  }

  TEST_CASE("paint placement converges at desk scale") {
    GridSpec s;
    s.lower = {0.0, 0.0};
    s.upper = {2.0, 1.0};
    s.nx = 30;
    s.obstacles.push_back(BoxObstacle{{0.55, 0.0}, {0.7, 0.4}});
    s.obstacles.push_back(BoxObstacle{{1.25, 0.6}, {1.4, 1.0}});
    s.obstacles.push_back(DiscObstacle{{1.0, 0.62}, 0.1});
    const Grid g = Grid::build(s);
    PaintField paint;
    paint.density.assign(g.planar_size(), 0.5);
    const Objective f = [&](std::span<const double> x) {
      const auto r = evaluate(with_parameters(paint, x), GameSpec{}, g);
      return std::pair{r.net, r.net_gradient};
    };
    const auto b = parameter_bounds(paint, g);
    AscentConfig cfg;
    cfg.lower = b.lower;
    cfg.upper = b.upper;
    cfg.max_iterations = 200;
    const auto res = maximize(f, parameters(paint), cfg);
    for (std::size_t k = 1; k < res.history.size(); ++k) {
      CHECK(res.history[k].value >= res.history[k - 1].value);
    }
    CHECK(res.history.back().gradient_norm <= 1e-3 * res.history.front().gradient_norm);
  }
}
