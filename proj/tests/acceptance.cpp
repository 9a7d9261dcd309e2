#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "eikgame/adjoint.hpp"
#include "eikgame/commands.hpp"
#include "eikgame/config.hpp"
#include "eikgame/games.hpp"
#include "eikgame/geodesic.hpp"
#include "eikgame/io.hpp"
#include "oracles.hpp"

using namespace eikgame;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
double best_time(int reps, F&& f) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

GridSpec strip(int nx, int ny = 0, int ntheta = 0, bool obstacles = false) {
  GridSpec s;
  s.lower = {0.0, 0.0};
  s.upper = {2.0, 1.0};
  s.nx = nx;
  s.ny = ny;
  s.ntheta = ntheta;
  if (obstacles) {
    s.obstacles.push_back(BoxObstacle{{0.55, 0.0}, {0.7, 0.4}});
    s.obstacles.push_back(BoxObstacle{{1.25, 0.6}, {1.4, 1.0}});
    s.obstacles.push_back(DiscObstacle{{1.0, 0.62}, 0.1});
  }
  return s;
}

const Vec2 kSeed{0.2, 0.5};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eikgame_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EIKGAME_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string configs(const std::string& name) { return std::string(EIKGAME_CONFIGS) + "/" + name; }

double euclid_error(int nx, int ny, double* solve_seconds) {
  const Grid g = Grid::build(strip(nx, ny));
  const std::vector<double> ones(g.size(), 1.0);
  const auto t0 = Clock::now();
  const auto field = StencilField::isotropic(g, ones);
  const auto res = fast_march(field, seeds_at_point(g, kSeed));
  if (solve_seconds) *solve_seconds = seconds_since(t0);
  const Point s = g.point_of_index(g.snap({kSeed[0], kSeed[1], 0.0}));
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Point p = g.point_of_index(g.unflat(n));
    err = std::max(err, std::abs(res.values[n] - std::hypot(p[0] - s[0], p[1] - s[1])));
  }
  return err;
}

Outcome eikonal_accuracy() {
  Outcome o;
  double t = 0.0;
  const double h = 2.0 / 180;
  const double e1 = euclid_error(180, 89, &t);
  const double e2 = euclid_error(360, 178, nullptr);
  o.require(e1 <= 5 * h, "max error " + fmt("%.3g", e1) + " <= 5h = " + fmt("%.3g", 5 * h));
  o.require(e2 < e1, "error at doubled resolution " + fmt("%.3g", e2));
  o.require(t <= 0.5, "solve " + fmt("%.3f", t) + " s <= 0.5 s");
  return o;
}

Outcome riemannian_accuracy() {
  Outcome o;
  const Grid g = Grid::build(strip(180, 89));
  const std::vector<Matrix2> metric(g.size(), Matrix2{{{1.0, 0.0}, {0.0, 4.0}}});
  const auto res = fast_march(StencilField::riemannian(g, metric), seeds_at_point(g, kSeed));
  const Point s = g.point_of_index(g.snap({kSeed[0], kSeed[1], 0.0}));
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Point p = g.point_of_index(g.unflat(n));
    const double dx = p[0] - s[0], dy = p[1] - s[1];
    err = std::max(err, std::abs(res.values[n] - std::sqrt(dx * dx + 4 * dy * dy)));
  }
  const double h = g.steps()[0];
  o.require(err <= 10 * h, "max error " + fmt("%.3g", err) + " <= 10h = " + fmt("%.3g", 10 * h));
  return o;
}

Outcome dubins_accuracy() {
  Outcome o;
  const double rho = 0.3;
  const Grid g = Grid::build(strip(180, 89, 60));
  const std::vector<double> ones(g.size(), 1.0);
  const auto t0 = Clock::now();
  const auto field = StencilField::curvature(g, MobilityModel::Dubins, rho, 0.1, ones);
  const auto res = fast_march(field, seeds_at_point(g, kSeed));
  const double t = seconds_since(t0);

  const Point s = g.point_of_index(g.snap({kSeed[0], kSeed[1], 0.0}));
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ui(0, 179), uj(0, 88), uk(0, 59);
  int sampled = 0, attempts = 0, within = 0;
  double worst = 0.0;
  while (sampled < 20 && attempts < 2000) {
    ++attempts;
    const MultiIndex idx{ui(rng), uj(rng), uk(rng)};
    const Point p = g.point_of_index(idx);
    if (std::hypot(p[0] - s[0], p[1] - s[1]) < 0.3) continue;
    bool inside = false;
    const double want = oracle::dubins_free_start({s[0], s[1]}, {p[0], p[1], p[2]}, rho, 3600,
                                                  {0.0, 0.0}, {2.0, 1.0}, &inside);
    if (!inside) continue;
    const double got = res.values[g.flat(idx)];
    const double rel = std::abs(got - want) / want;
    worst = std::max(worst, rel);
    within += rel <= 0.10;
    ++sampled;
  }
  o.require(sampled == 20, std::to_string(sampled) + " configurations sampled");
  o.require(worst <= 0.10, "max relative error " + fmt("%.3g", worst) + " <= 0.10 (" +
                                std::to_string(within) + "/" + std::to_string(sampled) + " within)");
  o.require(t <= 10.0, "solve " + fmt("%.2f", t) + " s <= 10 s");
  return o;
}

Outcome adjoint_correctness() {
  Outcome o;
  struct Case {
    std::string name;
    SensorConfig sensors;
    MobilityModel model;
  };
  const Grid planar = Grid::build(strip(40, 0, 0, true));
  const Grid angular = Grid::build(strip(40, 0, 16, true));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.2, 0.9);
  PaintField paint;
  paint.density.resize(planar.planar_size());
  for (auto& v : paint.density) v = u(rng);
  CameraSet cams;
  cams.points = {{0.9, 0.3}, {1.5, 0.4}};
  RadarSet radars;
  radars.points = {{0.8, 0.8}, {1.0, 0.2}, {1.5, 0.5}};
  radars.delta = 0.2;
  const std::vector<Case> cases{
      {"paint/isotropic", paint, MobilityModel::Isotropic},
      {"paint/reeds_shepp_forward", paint, MobilityModel::ReedsSheppForward},
      {"paint/dubins", paint, MobilityModel::Dubins},
      {"camera/isotropic", cams, MobilityModel::Isotropic},
      {"camera/reeds_shepp_forward", cams, MobilityModel::ReedsSheppForward},
      {"camera/dubins", cams, MobilityModel::Dubins},
      {"radar/riemannian", radars, MobilityModel::Riemannian},
      {"radar/reeds_shepp_forward", radars, MobilityModel::ReedsSheppForward},
      {"radar/dubins", radars, MobilityModel::Dubins},
  };
  GradientCheckOptions opts;
  opts.coordinates = 10;
  opts.tolerance = 1e-4;
  for (const auto& c : cases) {
    GameSpec spec;
    spec.model = c.model;
    const Grid& g = is_curvature_model(c.model) ? angular : planar;
    const GradientCheck check = check_gradient(c.sensors, spec, g, opts, 7);
    double worst = 0.0;
    for (const auto& e : check.entries) worst = std::max(worst, e.relative_error);
    o.require(check.passed, c.name + " " + std::to_string(check.entries.size()) + " coords, max rel " +
                                fmt("%.2g", worst));
  }

  double worst_duality = 0.0;
  for (auto model : {MobilityModel::Isotropic, MobilityModel::ReedsSheppForward, MobilityModel::Dubins}) {
    const Grid& g = is_curvature_model(model) ? angular : planar;
    std::vector<double> cost(g.size());
    for (auto& v : cost) v = u(rng);
    const auto field = is_curvature_model(model) ? StencilField::curvature(g, model, 0.3, 0.1, cost)
                                                 : StencilField::isotropic(g, cost);
    const auto res = fast_march(field, seeds_at_point(g, kSeed));
    TargetFunctional target;
    for (std::size_t n = 0; n < g.size(); n += 97) {
      if (res.accepted(n)) target.terms.push_back({n, u(rng) - 0.5});
    }
    std::vector<double> dl(g.size());
    for (auto& v : dl) v = u(rng) - 0.5;
    const auto du = forward_diff(res, dl);
    const auto sens = reverse_diff(res, target);
    double lhs = 0.0, rhs = 0.0;
    for (const auto& [n, c] : target.terms) lhs += c * du[n];
    for (std::size_t n = 0; n < g.size(); ++n) rhs += sens.per_node[n] * dl[n];
    worst_duality = std::max(worst_duality, std::abs(lhs - rhs) / std::abs(lhs));
  }
  o.require(worst_duality <= 1e-10, "duality gap " + fmt("%.2g", worst_duality));
  return o;
}

Outcome adjoint_complexity() {
  Outcome o;
  for (int ntheta : {0, 60}) {
    const Grid g = Grid::build(strip(180, 89, ntheta));
    const std::vector<double> ones(g.size(), 1.0);
    const auto field = ntheta ? StencilField::curvature(g, MobilityModel::Dubins, 0.3, 0.1, ones)
                              : StencilField::isotropic(g, ones);
    const auto seeds = seeds_at_point(g, kSeed);
    SolveResult res;
    const double solve = best_time(3, [&] { res = fast_march(field, seeds); });
    TargetFunctional target;
    for (std::size_t c : target_cells(GameSpec{}, g)) {
      for (int k = 0; k < g.dims()[2]; ++k) target.terms.push_back({c + k * g.planar_size(), 1.0});
    }
    const double reverse = best_time(3, [&] { reverse_diff(res, target); });
    o.require(reverse <= solve, std::string(ntheta ? "dubins" : "isotropic") + " reverse " +
                                    fmt("%.4f", reverse) + " s vs solve " + fmt("%.4f", solve) + " s");
  }
  const auto gradient_time = [](int nx) {
    const Grid g = Grid::build(strip(nx, 0, 0, true));
    PaintField p;
    p.density.assign(g.planar_size(), 0.5);
    return std::make_pair(g.size(), best_time(5, [&] { evaluate(p, GameSpec{}, g); }));
  };
  const auto [n1, t1] = gradient_time(360);
  const auto [n2, t2] = gradient_time(509);
  const double node_ratio = static_cast<double>(n2) / n1;
  o.require(t2 / t1 <= 2.6, "gradient time ratio " + fmt("%.2f", t2 / t1) + " for node ratio " +
                                fmt("%.2f", node_ratio));
  return o;
}

Outcome game_properties() {
  Outcome o;
  {
    const Grid g = Grid::build(strip(60, 0, 0, true));
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    EvaluateOptions eo;
    eo.gradient = false;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      PaintField a, b, m;
      a.density.resize(g.planar_size());
      for (auto& v : a.density) v = u(rng);
      b = a;
      for (auto& v : b.density) v = u(rng);
      m = a;
      const double lam = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      for (std::size_t p = 0; p < m.density.size(); ++p) {
        m.density[p] = lam * a.density[p] + (1 - lam) * b.density[p];
      }
      const double fa = evaluate(a, GameSpec{}, g, eo).value;
      const double fb = evaluate(b, GameSpec{}, g, eo).value;
      const double fm = evaluate(m, GameSpec{}, g, eo).value;
      worst = std::max(worst, lam * fa + (1 - lam) * fb - fm);
    }
    o.require(worst <= 1e-8, "concavity worst violation " + fmt("%.2g", worst) + " over 50 pairs");
  }
  {
    const Grid g = Grid::build(strip(180, 0, 0, true));
    PaintField p;
    p.density.resize(g.planar_size());
    for (std::size_t c = 0; c < g.planar_size(); ++c) {
      const Point x = g.point_of_index(g.unflat(c));
      p.density[c] = 0.55 + 0.35 * std::sin(3.0 * x[0]) * std::cos(4.0 * x[1]);
    }
    EvaluateOptions eo;
    eo.paths = true;
    eo.gradient = false;
    const auto r = evaluate(p, GameSpec{}, g, eo);
    // Independent return solve: seed the keypoint, trace back from the seed.
    const auto cost = cost_field_paint(p, g);
    const auto back = fast_march(StencilField::isotropic(g, cost), seeds_at_point(g, GameSpec{}.keypoint));
    const Path ret = trace(back, g, g.flat(g.snap({kSeed[0], kSeed[1], 0.0})));
    const double d = hausdorff_distance(*r.forward_path, ret);
    const double h = g.steps()[0];
    o.require(d <= 2 * h, "forward/return Hausdorff " + fmt("%.4f", d) + " <= 2h");
  }
  {
    const RunConfig cfg = load_run_config(configs("free_dubins.json"));
    const Grid g = make_grid(cfg);
    EvaluateOptions eo;
    eo.paths = true;
    eo.gradient = false;
    const auto r = evaluate(resolve_sensors(cfg, g), cfg.game, g, eo);
    const double h = g.steps()[0];
    const double bound = (1 / cfg.game.rho) * (1 + 10 * h / cfg.game.rho);
    double kmax = 0.0;
    for (const Path* p : {&*r.forward_path, &*r.return_path}) {
      for (double k : discrete_curvature(*p, 2 * h)) kmax = std::max(kmax, k);
    }
    o.require(kmax <= bound, "dubins max curvature " + fmt("%.3f", kmax) + " <= " + fmt("%.3f", bound));
  }
  {
    const Grid planar = Grid::build(strip(60, 0, 0, true));
    const Grid angular = Grid::build(strip(40, 0, 16, true));
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(0.4, 1.6), uy(0.1, 0.9);
    const auto free_point = [&](const Grid& g) {
      for (;;) {
        const Vec2 q{ux(rng), uy(rng)};
        if (!g.masked_at(q)) return q;
      }
    };
    int violations = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const bool camera = trial % 2 == 0;
      const MobilityModel model = camera ? (trial % 4 == 0 ? MobilityModel::Isotropic : MobilityModel::Dubins)
                                         : (trial % 4 == 1 ? MobilityModel::Riemannian
                                                           : MobilityModel::ReedsSheppForward);
      const Grid& g = is_curvature_model(model) ? angular : planar;
      GameSpec spec;
      spec.model = model;
      EvaluateOptions eo;
      eo.gradient = false;
      const int count = 1 + trial % 3;
      double before = 0.0, after = 0.0;
      if (camera) {
        CameraSet c;
        for (int k = 0; k < count; ++k) c.points.push_back(free_point(g));
        before = evaluate(c, spec, g, eo).value;
        c.points.push_back(free_point(g));
        after = evaluate(c, spec, g, eo).value;
      } else {
        RadarSet r;
        r.delta = 0.2;
        for (int k = 0; k < count; ++k) r.points.push_back(free_point(g));
        before = evaluate(r, spec, g, eo).value;
        r.points.push_back(free_point(g));
        after = evaluate(r, spec, g, eo).value;
      }
      if (after < before) ++violations;
    }
    o.require(violations == 0, "sensor monotonicity violations " + std::to_string(violations) + "/20");
  }
  return o;
}

std::vector<nlohmann::json> read_log(const fs::path& file) {
  std::vector<nlohmann::json> rows;
  const std::string text = read_text(file);
  std::size_t pos = text.find('\n') + 1;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    std::vector<double> cols;
    std::size_t a = 0;
    while (a <= line.size()) {
      const std::size_t b = std::min(line.find(',', a), line.size());
      cols.push_back(std::stod(line.substr(a, b - a)));
      a = b + 1;
    }
    rows.push_back({{"value", cols[1]}, {"gradient_norm", cols[3]}});
  }
  return rows;
}

Outcome optimization() {
  Outcome o;
  {
    const fs::path dir = scratch("paint");
    write_text(dir / "config.json", R"({
  "schema_version": 1,
  "grid": {
    "rect": [[0, 0], [2, 1]], "nx": 16, "ny": "auto",
    "obstacles": [
      {"type": "box", "lower": [0.55, 0.0], "upper": [0.7, 0.4]},
      {"type": "box", "lower": [1.25, 0.6], "upper": [1.4, 1.0]},
      {"type": "disc", "center": [1.0, 0.62], "radius": 0.1}
    ]
  },
  "sensors": {"type": "paint", "density": 0.5},
  "optimize": {"max_iterations": 100}
})");
    const int code = run_cli("optimize --config " + (dir / "config.json").string() + " --out " + dir.string());
    o.require(code == 0, "paint optimize exit " + std::to_string(code));
    if (code == 0) {
      const auto log = read_log(dir / "log.csv");
      bool monotone = true;
      for (std::size_t k = 1; k < log.size(); ++k) {
        monotone = monotone && log[k]["value"].get<double>() >= log[k - 1]["value"].get<double>();
      }
      const double reduction =
          log.front()["gradient_norm"].get<double>() / log.back()["gradient_norm"].get<double>();
      o.require(monotone, "paint history monotone over " + std::to_string(log.size() - 1) + " iterations");
      o.require(reduction >= 1e3, "projected gradient reduced " + fmt("%.3g", reduction) + "x");
    }
  }
  {
    const fs::path dir = scratch("radar");
    const int code = run_cli("optimize --config " + configs("radar.json") + " --out " + dir.string());
    o.require(code == 0, "radar optimize exit " + std::to_string(code));
    if (code == 0) {
      const auto result = nlohmann::json::parse(read_text(dir / "result.json"));
      const double before = result["initial_net"], after = result["final_net"];
      o.require(after > before, "radar value " + fmt("%.4f", before) + " -> " + fmt("%.4f", after));
      const auto sensors = nlohmann::json::parse(read_text(dir / "sensors.json"));
      const RunConfig cfg = load_run_config(configs("radar.json"));
      const auto& box = std::get<RadarSet>(cfg.sensors);
      bool inside = true;
      for (const auto& p : sensors["points"]) {
        const double x = p[0], y = p[1];
        inside = inside && x >= box.box_lower[0] && x <= box.box_upper[0] && y >= box.box_lower[1] &&
                 y <= box.box_upper[1];
      }
      o.require(inside, "radars inside the admissible box");
    }
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"solve --plot", "free_dubins.json"},
      {"gradient --check-gradient --seed 3 --plot", "paint.json"},
      {"gradient --check-gradient --seed 5", "radar_riemannian.json"},
      {"optimize --plot", "camera.json"},
      {"stencil-dump --plot", "stencil_riemannian.json"},
  };
  int files = 0;
  for (const auto& [args, config] : runs) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const int ca = run_cli(args + " --config " + configs(config) + " --out " + a.string());
    const int cb = run_cli(args + " --config " + configs(config) + " --out " + b.string());
    if (ca != 0 || cb != 0) {
      o.require(false, config + " exit codes " + std::to_string(ca) + "/" + std::to_string(cb));
      continue;
    }
    for (const auto& e : fs::directory_iterator(a)) {
      const std::string name = e.path().filename().string();
      if (name == "timings.json") continue;
      ++files;
      if (!fs::exists(b / name) || read_text(e.path()) != read_text(b / name)) {
        o.require(false, config + ": " + name + " differs");
      }
    }
  }
  o.require(files > 0, std::to_string(files) + " output files byte-identical across two runs");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"eikonal accuracy", eikonal_accuracy},
      {"riemannian accuracy", riemannian_accuracy},
      {"dubins accuracy", dubins_accuracy},
      {"adjoint correctness", adjoint_correctness},
      {"adjoint complexity", adjoint_complexity},
      {"game properties", game_properties},
      {"optimization", optimization},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
