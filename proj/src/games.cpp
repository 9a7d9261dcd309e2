#include "eikgame/games.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>

#include "eikgame/adjoint.hpp"
#include "eikgame/error.hpp"

namespace eikgame {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec2 planar_center(const Grid& g, std::size_t cell) {
  const MultiIndex idx = g.unflat(cell);
  const Point p = g.point_of_index({idx[0], idx[1], 0});
  return {p[0], p[1]};
}

double min_step(const Grid& g) { return std::min(g.steps()[0], g.steps()[1]); }

// Radar contribution (delta^2 I + (1 - delta^2) r r^T) / d_c^4 and its
// derivative along the radar coordinate `axis` (-1 for no derivative).
struct RadarTerm {
  Matrix2 m{};
  Matrix2 dm[2]{};
};

RadarTerm radar_term(Vec2 q, Vec2 p, double delta, double min_distance, bool with_derivative) {
  RadarTerm out;
  const double rx = q[0] - p[0];
  const double ry = q[1] - p[1];
  const double d = std::hypot(rx, ry);
  const double dc = std::max(d, min_distance);
  const double d2 = delta * delta;
  double ux = 1.0;
  double uy = 0.0;
  if (d > 0.0) {
    ux = rx / d;
    uy = ry / d;
  }
  const double inv4 = 1.0 / (dc * dc * dc * dc);
  const double u[2] = {ux, uy};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      out.m[r][c] = ((r == c ? d2 : 0.0) + (1.0 - d2) * u[r] * u[c]) * inv4;
    }
  }
  if (!with_derivative || !(d > 0.0)) return out;
  for (int a = 0; a < 2; ++a) {
    // d u / d q_a = (e_a - u u_a) / d
    double du[2];
    for (int r = 0; r < 2; ++r) du[r] = ((r == a ? 1.0 : 0.0) - u[r] * u[a]) / d;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        double v = (1.0 - d2) * (du[r] * u[c] + u[r] * du[c]) * inv4;
        if (d > min_distance) v += -4.0 / dc * u[a] * out.m[r][c];
        out.dm[a][r][c] = v;
      }
    }
  }
  return out;
}

double quad(const Matrix2& m, Vec2 v) {
  return v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1]);
}

double frobenius(const Matrix2& a, const Matrix2& b) {
  return a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1];
}

Vec2 heading(const Grid& g, std::size_t node, bool flipped) {
  const double theta = (static_cast<double>(node / g.planar_size()) + 0.5) * g.steps()[2];
  const double s = flipped ? -1.0 : 1.0;
  return {s * std::cos(theta), s * std::sin(theta)};
}

std::vector<double> radar_curvature_cost(const RadarSet& radars, const Grid& grid, bool flipped) {
  const std::size_t np = grid.planar_size();
  std::vector<Matrix2> metric(np);
  for (std::size_t c = 0; c < np; ++c) {
    if (!grid.masked(c)) metric[c] = radar_metric(radars, planar_center(grid, c), 2.0 * min_step(grid));
  }
  std::vector<double> cost(grid.size(), 1.0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (grid.masked(n)) continue;
    const double f = std::sqrt(quad(metric[n % np], heading(grid, n, flipped)));
    cost[n] = std::min(f, radars.cost_cap);
  }
  return cost;
}

struct ScalarCosts {
  std::vector<double> plus;
  std::vector<double> minus;  // empty when identical to plus
};

}  // namespace

void GameSpec::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("game: rho must be > 0");
  if (!(epsilon >= 0.0) || epsilon > 1.0) throw std::invalid_argument("game: epsilon must lie in [0,1]");
  if (tau && !(*tau > 0.0)) throw std::invalid_argument("game: tau must be > 0");
  if (seed == keypoint) throw std::invalid_argument("game: seed and keypoint coincide");
}

SoftMin softmin(std::span<const double> values, std::span<const double> prior, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmin: tau must be > 0");
  if (prior.size() != values.size()) throw std::invalid_argument("softmin: prior size mismatch");
  double m = kUnreached;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < kUnreached && prior[i] > 0.0) m = std::min(m, values[i]);
  }
  if (!(m < kUnreached)) throw std::invalid_argument("softmin: all entries are +inf");
  SoftMin out;
  out.weights.assign(values.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < kUnreached && prior[i] > 0.0) {
      out.weights[i] = prior[i] * std::exp(-(values[i] - m) / tau);
      z += out.weights[i];
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.weights[i] /= z;
    if (out.weights[i] > 0.0) mean += out.weights[i] * values[i];
  }
  out.value = m - tau * std::log(z);
  out.dtau = (out.value - mean) / tau;
  return out;
}

SoftMin softmin(std::span<const double> values, double tau) {
  const std::vector<double> prior(values.size(), 1.0);
  return softmin(values, prior, tau);
}

std::vector<double> cost_field_paint(const PaintField& paint, const Grid& grid) {
  if (paint.density.size() != grid.planar_size()) {
    throw std::invalid_argument("paint: density size does not match the planar grid");
  }
  std::vector<double> cost(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double xi = paint.density[n % grid.planar_size()];
    if (!(xi >= paint.min_density) || !(xi <= paint.max_density)) {
      throw std::invalid_argument("paint: density out of bounds");
    }
    cost[n] = xi;
  }
  return cost;
}

bool line_of_sight(Vec2 p, Vec2 q, const Grid& grid) {
  const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
  const int n = static_cast<int>(std::ceil(len / (0.5 * min_step(grid))));
  for (int i = 0; i <= n; ++i) {
    const double t = n == 0 ? 0.0 : static_cast<double>(i) / n;
    if (grid.masked_at({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])})) return false;
  }
  return true;
}

CameraVisibility camera_visibility(const CameraSet& cams, const Grid& grid) {
  const std::size_t np = grid.planar_size();
  CameraVisibility vis;
  vis.cameras = cams.points.size();
  vis.visible.assign(vis.cameras * np, 0);
  for (std::size_t c = 0; c < vis.cameras; ++c) {
    for (std::size_t cell = 0; cell < np; ++cell) {
      if (grid.masked(cell)) continue;
      vis.visible[c * np + cell] = line_of_sight(planar_center(grid, cell), cams.points[c], grid);
    }
  }
  return vis;
}

std::vector<double> cost_field_camera(const CameraSet& cams, const Grid& grid,
                                      const CameraVisibility* frozen) {
  for (const auto& q : cams.points) {
    if (!grid.inside_rectangle(q)) throw std::invalid_argument("camera: outside the rectangle");
    if (grid.masked_at(q)) throw std::invalid_argument("camera: inside an obstacle");
  }
  CameraVisibility local;
  if (!frozen) {
    local = camera_visibility(cams, grid);
    frozen = &local;
  } else if (frozen->cameras != cams.points.size()) {
    throw std::invalid_argument("camera: frozen visibility does not match the camera count");
  }
  const std::size_t np = grid.planar_size();
  std::vector<double> cost(np, cams.background);
  for (std::size_t cell = 0; cell < np; ++cell) {
    if (grid.masked(cell)) continue;
    const Vec2 p = planar_center(grid, cell);
    double c = cams.background;
    for (std::size_t k = 0; k < cams.points.size(); ++k) {
      if (!(*frozen)(k, cell, np)) continue;
      const double d2 = std::pow(cams.points[k][0] - p[0], 2) + std::pow(cams.points[k][1] - p[1], 2);
      c += d2 > 0.0 ? 1.0 / d2 : cams.cost_cap;
    }
    cost[cell] = std::min(c, cams.cost_cap);
  }
  return cost;
}

Matrix2 radar_metric(const RadarSet& radars, Vec2 p, double min_distance) {
  Matrix2 m{};
  for (const auto& q : radars.points) {
    const RadarTerm t = radar_term(q, p, radars.delta, min_distance, false);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) m[r][c] += t.m[r][c];
    }
  }
  return m;
}

double radar_factor(const RadarSet& radars, Vec2 p, Vec2 v, double min_distance) {
  return std::sqrt(quad(radar_metric(radars, p, min_distance), v));
}

RadarCost cost_field_radar(const RadarSet& radars, const Grid& grid, MobilityModel model) {
  if (radars.points.empty()) throw std::invalid_argument("radar: empty radar set");
  if (!(radars.delta > 0.0) || radars.delta > 1.0) throw std::invalid_argument("radar: delta must lie in (0,1]");
  RadarCost out;
  if (model == MobilityModel::Riemannian) {
    out.metric.assign(grid.planar_size(), Matrix2{{{1.0, 0.0}, {0.0, 1.0}}});
    for (std::size_t c = 0; c < grid.planar_size(); ++c) {
      if (!grid.masked(c)) out.metric[c] = radar_metric(radars, planar_center(grid, c), 2.0 * min_step(grid));
    }
  } else if (is_curvature_model(model)) {
    out.scalar = radar_curvature_cost(radars, grid, false);
  } else {
    throw std::invalid_argument("radar: needs a riemannian or curvature model");
  }
  return out;
}

std::vector<double> parameters(const SensorConfig& config) {
  return std::visit(
      [](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FreeModel>) {
          return {};
        } else if constexpr (std::is_same_v<T, PaintField>) {
          return s.density;
        } else {
          std::vector<double> out;
          for (const auto& p : s.points) {
            out.push_back(p[0]);
            out.push_back(p[1]);
          }
          return out;
        }
      },
      config);
}

SensorConfig with_parameters(const SensorConfig& config, std::span<const double> params) {
  if (params.size() != parameters(config).size()) {
    throw std::invalid_argument("sensors: parameter count mismatch");
  }
  return std::visit(
      [&](const auto& s) -> SensorConfig {
        using T = std::decay_t<decltype(s)>;
        T copy = s;
        if constexpr (std::is_same_v<T, PaintField>) {
          copy.density.assign(params.begin(), params.end());
        } else if constexpr (!std::is_same_v<T, FreeModel>) {
          for (std::size_t i = 0; i < copy.points.size(); ++i) {
            copy.points[i] = {params[2 * i], params[2 * i + 1]};
          }
        }
        return copy;
      },
      config);
}

ParameterBounds parameter_bounds(const SensorConfig& config, const Grid& grid) {
  ParameterBounds b;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PaintField>) {
          b.lower.assign(s.density.size(), s.min_density);
          b.upper.assign(s.density.size(), s.max_density);
        } else if constexpr (std::is_same_v<T, CameraSet>) {
          for (std::size_t i = 0; i < s.points.size(); ++i) {
            b.lower.insert(b.lower.end(), {grid.lower()[0], grid.lower()[1]});
            b.upper.insert(b.upper.end(), {grid.upper()[0], grid.upper()[1]});
          }
        } else if constexpr (std::is_same_v<T, RadarSet>) {
          for (std::size_t i = 0; i < s.points.size(); ++i) {
            b.lower.insert(b.lower.end(), {s.box_lower[0], s.box_lower[1]});
            b.upper.insert(b.upper.end(), {s.box_upper[0], s.box_upper[1]});
          }
        }
      },
      config);
  return b;
}

void validate_sensors(const SensorConfig& config, const Grid& grid, MobilityModel model) {
  if (is_curvature_model(model) != grid.has_angle()) {
    throw std::invalid_argument("game: curvature models need an angular axis, planar ones none");
  }
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PaintField>) {
          if (model == MobilityModel::Riemannian) {
            throw std::invalid_argument("paint: use the isotropic or a curvature model");
          }
          if (!(s.min_density > 0.0) || s.min_density > s.max_density) {
            throw std::invalid_argument("paint: invalid density bounds");
          }
          cost_field_paint(s, grid);
        } else if constexpr (std::is_same_v<T, CameraSet>) {
          if (model == MobilityModel::Riemannian) {
            throw std::invalid_argument("camera: use the isotropic or a curvature model");
          }
          if (!(s.background > 0.0)) throw std::invalid_argument("camera: background cost must be > 0");
          for (const auto& q : s.points) {
            if (!grid.inside_rectangle(q)) throw std::invalid_argument("camera: outside the rectangle");
            if (grid.masked_at(q)) throw std::invalid_argument("camera: inside an obstacle");
          }
        } else if constexpr (std::is_same_v<T, RadarSet>) {
          if (model == MobilityModel::Isotropic) {
            throw std::invalid_argument("radar: needs a riemannian or curvature model");
          }
          if (s.points.empty()) throw std::invalid_argument("radar: empty radar set");
          if (!(s.delta > 0.0) || s.delta > 1.0) throw std::invalid_argument("radar: delta must lie in (0,1]");
          for (const auto& q : s.points) {
            if (q[0] < s.box_lower[0] || q[0] > s.box_upper[0] || q[1] < s.box_lower[1] ||
                q[1] > s.box_upper[1]) {
              throw std::invalid_argument("radar: outside the admissible box");
            }
            if (grid.masked_at(q)) throw std::invalid_argument("radar: inside an obstacle");
          }
        }
      },
      config);
}

std::vector<std::size_t> target_cells(const GameSpec& spec, const Grid& grid) {
  const MultiIndex k = grid.snap({spec.keypoint[0], spec.keypoint[1], 0.0});
  std::vector<std::size_t> cells;
  const int r = spec.blur ? 1 : 0;
  for (int dj = -r; dj <= r; ++dj) {
    for (int di = -r; di <= r; ++di) {
      const MultiIndex c{k[0] + di, k[1] + dj, 0};
      if (!grid.in_range(c)) continue;
      const std::size_t f = grid.flat(c);
      if (!grid.masked(f)) cells.push_back(f);
    }
  }
  return cells;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("EIKGAME_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ObjectiveResult evaluate(const SensorConfig& config, const GameSpec& spec, const Grid& grid,
                         const EvaluateOptions& options) {
  spec.validate();
  validate_sensors(config, grid, spec.model);
  const auto t_solve = Clock::now();
  const std::size_t np = grid.planar_size();
  const bool curvature = is_curvature_model(spec.model);

  ScalarCosts costs;
  std::vector<Matrix2> metric;
  CameraVisibility visibility;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FreeModel>) {
          if (spec.model == MobilityModel::Riemannian) {
            metric.assign(np, Matrix2{{{1.0, 0.0}, {0.0, 1.0}}});
          } else {
            costs.plus.assign(grid.size(), 1.0);
          }
        } else if constexpr (std::is_same_v<T, PaintField>) {
          costs.plus = cost_field_paint(s, grid);
        } else if constexpr (std::is_same_v<T, CameraSet>) {
          if (options.frozen_visibility) {
            visibility = *options.frozen_visibility;
          } else {
            visibility = camera_visibility(s, grid);
          }
          const auto planar = cost_field_camera(s, grid, &visibility);
          costs.plus.resize(grid.size());
          for (std::size_t n = 0; n < grid.size(); ++n) costs.plus[n] = planar[n % np];
        } else {
          if (spec.model == MobilityModel::Riemannian) {
            metric = cost_field_radar(s, grid, spec.model).metric;
          } else {
            costs.plus = radar_curvature_cost(s, grid, false);
            auto minus = radar_curvature_cost(s, grid, true);
            if (minus != costs.plus) costs.minus = std::move(minus);
          }
        }
      },
      config);

  auto make_field = [&](const std::vector<double>& cost) {
    if (spec.model == MobilityModel::Riemannian) return StencilField::riemannian(grid, metric);
    if (curvature) return StencilField::curvature(grid, spec.model, spec.rho, spec.epsilon, cost);
    return StencilField::isotropic(grid, cost);
  };

  const SeedSet seeds = seeds_at_point(grid, spec.seed);
  const StencilField field_plus = make_field(costs.plus);
  std::optional<StencilField> field_minus;
  auto plus = std::make_shared<SolveResult>();
  std::shared_ptr<SolveResult> minus;
  if (!costs.minus.empty()) {
    field_minus.emplace(make_field(costs.minus));
    if (thread_budget() >= 2) {
      auto fut = std::async(std::launch::async, [&] { return fast_march(*field_minus, seeds); });
      *plus = fast_march(field_plus, seeds);
      minus = std::make_shared<SolveResult>(fut.get());
    } else {
      *plus = fast_march(field_plus, seeds);
      minus = std::make_shared<SolveResult>(fast_march(*field_minus, seeds));
    }
  } else {
    *plus = fast_march(field_plus, seeds);
  }
  const bool split = static_cast<bool>(minus);

  // Target set: keypoint cells x angular fibers with uniform normalized weights.
  const auto cells = target_cells(spec, grid);
  const int nt = grid.dims()[2];
  const double prior_weight = 1.0 / ((spec.blur ? 9.0 : 1.0) * nt);
  std::vector<std::size_t> nodes;
  std::vector<double> vals;
  for (const auto c : cells) {
    for (int k = 0; k < nt; ++k) {
      const std::size_t n = c + static_cast<std::size_t>(k) * np;
      nodes.push_back(n);
      const double up = plus->values[n];
      const double um = split ? minus->values[n] : up;
      vals.push_back(up < kUnreached && um < kUnreached ? up + um : kUnreached);
    }
  }
  std::size_t argmin = nodes.size();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] < kUnreached && (argmin == nodes.size() || vals[i] < vals[argmin])) argmin = i;
  }
  if (argmin == nodes.size()) throw NumericalError("game: keypoint is unreachable");
  const double tau = spec.tau ? *spec.tau : 0.01 * vals[argmin];
  if (!(tau > 0.0)) throw NumericalError("game: keypoint coincides with the seed");
  const std::vector<double> prior(vals.size(), prior_weight);
  const SoftMin sm = softmin(vals, prior, tau);

  ObjectiveResult out;
  out.value = sm.value;
  out.tau = tau;
  out.target_node = nodes[argmin];
  out.solve_seconds = seconds_since(t_solve);

  out.value_map.assign(np, kUnreached);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    out.value_map[n % np] = std::min(out.value_map[n % np], plus->values[n]);
  }

  double supply = 0.0;
  const double cell_area = grid.steps()[0] * grid.steps()[1];
  if (const auto* paint = std::get_if<PaintField>(&config)) {
    for (std::size_t c = 0; c < np; ++c) {
      if (!grid.masked(c)) supply += paint->density[c] * cell_area;
    }
  }
  out.net = out.value - supply;

  if (options.paths) {
    out.forward_path = trace(*plus, grid, out.target_node).reversed();
    out.return_path = trace(split ? *minus : *plus, grid, out.target_node).reversed();
  }

  if (options.gradient) {
    const auto t_grad = Clock::now();
    // d value / d vals_i, including the auto temperature's dependence on the
    // hard minimum.
    std::vector<double> dvals = sm.weights;
    if (!spec.tau) dvals[argmin] += sm.dtau * 0.01;
    TargetFunctional jp;
    TargetFunctional jm;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (dvals[i] == 0.0) continue;
      if (split) {
        jp.terms.push_back({nodes[i], dvals[i]});
        jm.terms.push_back({nodes[i], dvals[i]});
      } else {
        jp.terms.push_back({nodes[i], 2.0 * dvals[i]});
      }
    }
    const SensitivityField sp = reverse_diff(*plus, jp);
    std::optional<SensitivityField> sminus;
    if (split) sminus = reverse_diff(*minus, jm);

    out.sensitivity.assign(np, 0.0);
    for (std::size_t n = 0; n < grid.size(); ++n) {
      out.sensitivity[n % np] += sp.per_node[n] + (sminus ? sminus->per_node[n] : 0.0);
    }

    std::vector<double> grad(parameters(config).size(), 0.0);
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, PaintField>) {
            for (std::size_t c = 0; c < np; ++c) {
              if (!grid.masked(c)) grad[c] = out.sensitivity[c] / s.density[c];
            }
          } else if constexpr (std::is_same_v<T, CameraSet>) {
            const auto planar = cost_field_camera(s, grid, &visibility);
            for (std::size_t c = 0; c < np; ++c) {
              if (grid.masked(c) || out.sensitivity[c] == 0.0 || planar[c] >= s.cost_cap) continue;
              const Vec2 p = planar_center(grid, c);
              for (std::size_t k = 0; k < s.points.size(); ++k) {
                if (!visibility(k, c, np)) continue;
                const double rx = s.points[k][0] - p[0];
                const double ry = s.points[k][1] - p[1];
                const double d2 = rx * rx + ry * ry;
                if (!(d2 > 0.0)) continue;
                const double f = out.sensitivity[c] / planar[c] * (-2.0) / (d2 * d2);
                grad[2 * k] += f * rx;
                grad[2 * k + 1] += f * ry;
              }
            }
          } else if constexpr (std::is_same_v<T, RadarSet>) {
            const double dmin = 2.0 * min_step(grid);
            if (spec.model == MobilityModel::Riemannian) {
              const auto dm = metric_sensitivity(*plus, field_plus, sp, metric);
              for (std::size_t c = 0; c < np; ++c) {
                if (grid.masked(c)) continue;
                const Vec2 p = planar_center(grid, c);
                for (std::size_t k = 0; k < s.points.size(); ++k) {
                  const RadarTerm t = radar_term(s.points[k], p, s.delta, dmin, true);
                  grad[2 * k] += frobenius(dm[c], t.dm[0]);
                  grad[2 * k + 1] += frobenius(dm[c], t.dm[1]);
                }
              }
            } else {
              std::vector<Matrix2> pm(np);
              for (std::size_t c = 0; c < np; ++c) {
                if (!grid.masked(c)) pm[c] = radar_metric(s, planar_center(grid, c), dmin);
              }
              auto chain = [&](const SensitivityField& sf, const std::vector<double>& cost, bool flipped) {
                for (std::size_t n = 0; n < grid.size(); ++n) {
                  const double sn = sf.per_node[n];
                  if (sn == 0.0 || cost[n] >= s.cost_cap) continue;
                  const std::size_t c = n % np;
                  const Vec2 v = heading(grid, n, flipped);
                  const double f2 = quad(pm[c], v);
                  const Vec2 p = planar_center(grid, c);
                  for (std::size_t k = 0; k < s.points.size(); ++k) {
                    const RadarTerm t = radar_term(s.points[k], p, s.delta, dmin, true);
                    grad[2 * k] += sn * quad(t.dm[0], v) / (2.0 * f2);
                    grad[2 * k + 1] += sn * quad(t.dm[1], v) / (2.0 * f2);
                  }
                }
              };
              chain(sp, costs.plus, false);
              if (sminus) chain(*sminus, costs.minus, true);
            }
          }
        },
        config);
    out.gradient = grad;
    out.net_gradient = grad;
    if (std::holds_alternative<PaintField>(config)) {
      for (std::size_t c = 0; c < np; ++c) {
        if (!grid.masked(c)) out.net_gradient[c] -= cell_area;
      }
    }
    out.gradient_seconds = seconds_since(t_grad);
  }
  if (options.keep_solves) {
    out.forward_solve = plus;
    out.return_solve = split ? std::shared_ptr<const SolveResult>(minus) : plus;
  }
  return out;
}

}  // namespace eikgame
