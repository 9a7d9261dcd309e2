#include "eikgame/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "eikgame/error.hpp"
#include "eikgame/io.hpp"
#include "eikgame/svg.hpp"

namespace eikgame {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kResolvable = 1e-3;

void prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

json grid_json(const Grid& grid) {
  const auto& d = grid.dims();
  const auto& s = grid.steps();
  json j = {{"dims", grid.has_angle() ? json{d[0], d[1], d[2]} : json{d[0], d[1]}},
            {"steps", grid.has_angle() ? json{s[0], s[1], s[2]} : json{s[0], s[1]}},
            {"nodes", grid.size()},
            {"free_nodes", grid.free_count()}};
  return j;
}

std::size_t accepted_count(const SolveResult& res) {
  return static_cast<std::size_t>(
      std::count_if(res.values.begin(), res.values.end(), [](double v) { return v < kUnreached; }));
}

std::vector<Vec2> sensor_points(const SensorConfig& s) {
  if (const auto* c = std::get_if<CameraSet>(&s)) return c->points;
  if (const auto* r = std::get_if<RadarSet>(&s)) return r->points;
  return {};
}

SvgScene base_scene(const Grid& grid, const GameSpec& spec, const SensorConfig& sensors,
                    const ObjectiveResult& r) {
  SvgScene scene;
  scene.grid = &grid;
  scene.level_map = r.value_map;
  scene.seed = spec.seed;
  scene.keypoint = spec.keypoint;
  scene.sensors = sensor_points(sensors);
  scene.glyph = std::holds_alternative<RadarSet>(sensors) ? Glyph::Radar : Glyph::Camera;
  if (const auto* p = std::get_if<PaintField>(&sensors)) scene.heatmap = p->density;
  if (r.forward_path) scene.paths.push_back({*r.forward_path, "#d22"});
  if (r.return_path) scene.paths.push_back({*r.return_path, "#23c"});
  return scene;
}

void write_paths(const fs::path& dir, const ObjectiveResult& r) {
  if (r.forward_path) write_path_csv(dir / "forward_path.csv", *r.forward_path);
  if (r.return_path) write_path_csv(dir / "return_path.csv", *r.return_path);
}

json objective_json(const ObjectiveResult& r) {
  return {{"value", r.value}, {"net", r.net}, {"tau", r.tau}, {"target_node", r.target_node}};
}

double coordinate_step(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }

SensorConfig relaxed(const SensorConfig& s) {
  SensorConfig out = s;
  if (auto* p = std::get_if<PaintField>(&out)) {
    p->min_density *= 0.5;
    p->max_density *= 2.0;
  }
  if (auto* r = std::get_if<RadarSet>(&out)) {
    r->box_lower = {-kUnreached, -kUnreached};
    r->box_upper = {kUnreached, kUnreached};
  }
  return out;
}

ModelParams node_params(const RunConfig& config, const Grid& grid, const SensorConfig& sensors,
                        const MultiIndex& node) {
  ModelParams params;
  params.model = config.game.model;
  params.rho = config.game.rho;
  params.epsilon = config.game.epsilon;
  const std::size_t flat = grid.flat(node);
  const std::size_t c = grid.planar_index(flat);
  const Point p = grid.point_of_index(node);
  const double dmin = 2.0 * std::min(grid.steps()[0], grid.steps()[1]);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PaintField>) {
          params.cost = s.density[c];
        } else if constexpr (std::is_same_v<T, CameraSet>) {
          params.cost = cost_field_camera(s, grid)[c];
        } else if constexpr (std::is_same_v<T, RadarSet>) {
          if (params.model == MobilityModel::Riemannian) {
            const Matrix2 m = radar_metric(s, {p[0], p[1]}, dmin);
            const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            params.dual_tensor = {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
          } else {
            params.cost = std::min(s.cost_cap, radar_factor(s, {p[0], p[1]}, {std::cos(p[2]), std::sin(p[2])}, dmin));
          }
        }
      },
      sensors);
  if (config.stencil_dump.dual_tensor) params.dual_tensor = *config.stencil_dump.dual_tensor;
  return params;
}

}  // namespace

GradientCheck check_gradient(const SensorConfig& sensors, const GameSpec& spec, const Grid& grid,
                             const GradientCheckOptions& options, std::uint64_t seed) {
  std::optional<CameraVisibility> frozen;
  if (const auto* cams = std::get_if<CameraSet>(&sensors)) frozen = camera_visibility(*cams, grid);
  EvaluateOptions eo;
  eo.frozen_visibility = frozen ? &*frozen : nullptr;
  const ObjectiveResult base = evaluate(sensors, spec, grid, eo);

  const SensorConfig loose = relaxed(sensors);
  const std::vector<double> x = parameters(sensors);
  // Components far below the largest one drown in the cancellation error of
  // the central difference, so only resolvable coordinates are sampled.
  double gmax = 0.0;
  for (double g : base.gradient) gmax = std::max(gmax, std::abs(g));
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(base.gradient[i]) >= kResolvable * gmax && base.gradient[i] != 0.0) support.push_back(i);
  }
  if (support.size() < static_cast<std::size_t>(options.coordinates)) {
    support.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) support[i] = i;
  }
  std::mt19937_64 rng(seed);
  std::shuffle(support.begin(), support.end(), rng);
  support.resize(std::min(support.size(), static_cast<std::size_t>(options.coordinates)));
  std::sort(support.begin(), support.end());

  EvaluateOptions fd = eo;
  fd.gradient = false;
  GradientCheck out;
  for (const std::size_t i : support) {
    const double h = coordinate_step(x[i], options.step);
    std::vector<double> xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fp = evaluate(with_parameters(loose, xp), spec, grid, fd).value;
    const double fm = evaluate(with_parameters(loose, xm), spec, grid, fd).value;
    GradientCheckEntry e;
    e.index = i;
    e.analytic = base.gradient[i];
    e.finite_difference = (fp - fm) / (2.0 * h);
    const double scale = std::max({std::abs(e.analytic), std::abs(e.finite_difference),
                                   1e-12 * std::max(1.0, std::abs(base.value))});
    e.relative_error = std::abs(e.analytic - e.finite_difference) / scale;
    out.passed = out.passed && e.relative_error <= options.tolerance;
    out.entries.push_back(e);
  }
  return out;
}

int cmd_solve(const RunConfig& config, const CommandOptions& options) {
  prepare(options.out_dir);
  const Grid grid = make_grid(config);
  const SensorConfig sensors = resolve_sensors(config, grid);
  EvaluateOptions eo;
  eo.gradient = false;
  eo.paths = true;
  eo.keep_solves = true;
  const ObjectiveResult r = evaluate(sensors, config.game, grid, eo);

  const fs::path& dir = options.out_dir;
  write_map(dir / "value", r.forward_solve->values, map_header(grid, false, r.forward_solve->seeds));
  write_map(dir / "value_planar", r.value_map, map_header(grid, true, r.forward_solve->seeds));
  const bool split = r.return_solve != r.forward_solve;
  if (split) {
    write_map(dir / "return_value", r.return_solve->values, map_header(grid, false, r.return_solve->seeds));
  }
  write_paths(dir, r);

  json meta = {{"command", "solve"},
               {"config", to_json(config)},
               {"grid", grid_json(grid)},
               {"objective", objective_json(r)},
               {"accepted_nodes", {{"forward", accepted_count(*r.forward_solve)},
                                   {"return", accepted_count(*r.return_solve)}}},
               {"separate_return_solve", split}};
  write_text(dir / "metadata.json", dump_json(meta) + "\n");
  write_text(dir / "timings.json", dump_json({{"solve_seconds", r.solve_seconds}}) + "\n");
  if (options.plot) {
    SvgScene scene = base_scene(grid, config.game, sensors, r);
    scene.title = "value function and optimal paths";
    write_text(dir / "solve.svg", render_scene(scene));
  }
  return 0;
}

int cmd_gradient(const RunConfig& config, const CommandOptions& options) {
  prepare(options.out_dir);
  const Grid grid = make_grid(config);
  const SensorConfig sensors = resolve_sensors(config, grid);
  EvaluateOptions eo;
  eo.paths = true;
  std::optional<CameraVisibility> frozen;
  if (const auto* cams = std::get_if<CameraSet>(&sensors)) {
    frozen = camera_visibility(*cams, grid);
    eo.frozen_visibility = &*frozen;
  }
  const ObjectiveResult r = evaluate(sensors, config.game, grid, eo);
  const fs::path& dir = options.out_dir;

  json obj = objective_json(r);
  obj["command"] = "gradient";
  obj["parameter_count"] = r.gradient.size();
  if (std::holds_alternative<PaintField>(sensors)) {
    write_map(dir / "gradient", r.gradient, map_header(grid, true));
    obj["gradient_map"] = "gradient";
  } else {
    obj["gradient"] = r.gradient;
  }
  write_map(dir / "sensitivity", r.sensitivity, map_header(grid, true));
  write_paths(dir, r);
  write_text(dir / "timings.json",
             dump_json({{"solve_seconds", r.solve_seconds}, {"gradient_seconds", r.gradient_seconds}}) + "\n");

  int code = 0;
  if (options.check_gradient) {
    const GradientCheck chk = check_gradient(sensors, config.game, grid, config.gradient_check, options.seed);
    json entries = json::array();
    for (const auto& e : chk.entries) {
      entries.push_back({{"index", e.index},
                         {"analytic", e.analytic},
                         {"finite_difference", e.finite_difference},
                         {"relative_error", e.relative_error}});
    }
    obj["gradient_check"] = {{"passed", chk.passed},
                             {"tolerance", config.gradient_check.tolerance},
                             {"seed", options.seed},
                             {"entries", entries}};
    if (!chk.passed) code = 3;
  }
  write_text(dir / "objective.json", dump_json(obj) + "\n");

  if (options.plot) {
    SvgScene scene = base_scene(grid, config.game, sensors, r);
    scene.title = "objective gradient";
    if (std::holds_alternative<PaintField>(sensors)) {
      scene.heatmap = r.gradient;
    } else {
      const auto pts = sensor_points(sensors);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        scene.arrows.push_back({pts[k], {r.gradient[2 * k], r.gradient[2 * k + 1]}});
      }
    }
    write_text(dir / "gradient.svg", render_scene(scene));
  }
  return code;
}

int cmd_optimize(const RunConfig& config, const CommandOptions& options) {
  prepare(options.out_dir);
  const Grid grid = make_grid(config);
  const SensorConfig initial = resolve_sensors(config, grid);
  const auto bounds = parameter_bounds(initial, grid);
  AscentConfig ascent = config.ascent;
  ascent.lower = bounds.lower;
  ascent.upper = bounds.upper;

  double solve_seconds = 0.0;
  double gradient_seconds = 0.0;
  const Objective f = [&](std::span<const double> x) -> std::pair<double, std::vector<double>> {
    try {
      const ObjectiveResult r = evaluate(with_parameters(initial, x), config.game, grid);
      solve_seconds += r.solve_seconds;
      gradient_seconds += r.gradient_seconds;
      return {r.net, r.net_gradient};
    } catch (const std::invalid_argument&) {
      // Inadmissible placement (e.g. a camera inside an obstacle).
    } catch (const NumericalError&) {
    }
    return {std::nan(""), std::vector<double>(x.size(), 0.0)};
  };
  const AscentResult res = maximize(f, parameters(initial), ascent);
  const SensorConfig final_sensors = with_parameters(initial, res.x);

  EvaluateOptions eo;
  eo.gradient = false;
  eo.paths = true;
  const ObjectiveResult fin = evaluate(final_sensors, config.game, grid, eo);
  const fs::path& dir = options.out_dir;
  write_log_csv(dir / "log.csv", res.history);
  write_text(dir / "sensors.json", dump_json(to_json(final_sensors)) + "\n");
  write_paths(dir, fin);
  json summary = {{"command", "optimize"},
                  {"initial_net", res.history.front().value},
                  {"final_net", res.value},
                  {"final", objective_json(fin)},
                  {"iterations", res.history.back().iteration},
                  {"evaluations", res.evaluations},
                  {"stop", to_string(res.stop)}};
  write_text(dir / "result.json", dump_json(summary) + "\n");
  write_text(dir / "timings.json",
             dump_json({{"solve_seconds", solve_seconds}, {"gradient_seconds", gradient_seconds}}) + "\n");
  if (options.plot) {
    SvgScene scene = base_scene(grid, config.game, final_sensors, fin);
    scene.title = "optimized sensors";
    write_text(dir / "optimize.svg", render_scene(scene));
  }
  return res.stop == AscentStop::LineSearchFailure && res.history.size() == 1 ? 3 : 0;
}

int cmd_stencil_dump(const RunConfig& config, const CommandOptions& options) {
  prepare(options.out_dir);
  const Grid grid = make_grid(config);
  const SensorConfig sensors = resolve_sensors(config, grid);
  MultiIndex node{grid.dims()[0] / 2, grid.dims()[1] / 2, 0};
  if (config.stencil_dump.node) node = *config.stencil_dump.node;
  if (options.node) node = *options.node;
  if (!grid.in_range(node)) throw ConfigError("stencil-dump: node outside the grid");
  if (grid.masked(grid.flat(node))) throw ConfigError("stencil-dump: node is masked");
  const ModelParams params = node_params(config, grid, sensors, node);
  StencilDump dump;
  try {
    dump = stencil_dump(grid, params, node);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stencil-dump: ") + e.what());
  }
  json j = to_json(dump);
  j["cost"] = params.cost;
  write_text(options.out_dir / "stencil.json", dump_json(j) + "\n");
  write_text(options.out_dir / "stencil.svg", render_stencil(dump));
  return 0;
}

}  // namespace eikgame
