#include "eikgame/config.hpp"

#include <cctype>
#include <set>
#include <stdexcept>

#include "eikgame/error.hpp"
#include "eikgame/io.hpp"

namespace eikgame {

namespace {

using nlohmann::json;

/// Walks a parsed document while remembering where each value came from, so
/// schema errors can point at a source line.
class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string ptr;
    for (const auto& p : path) ptr += "/" + p;
    if (ptr.empty()) ptr = "/";
    throw ConfigError("config:" + std::to_string(line_of(path)) + ": " + ptr + ": " + msg);
  }

  const json& field(const json& obj, std::vector<std::string> path, const std::string& key) const {
    path.push_back(key);
    if (!obj.contains(key)) {
      path.pop_back();
      fail(path, "missing field \"" + key + "\"");
    }
    return obj.at(key);
  }

  void known_keys(const json& obj, const std::vector<std::string>& path,
                  std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown field");
      }
    }
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  Vec2 vec2(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {number(v[0], path), number(v[1], path)};
  }

  std::vector<Vec2> points(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "expected a list of [x, y] points");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto p = path;
      p.push_back(std::to_string(i));
      out.push_back(vec2(v[i], p));
    }
    return out;
  }

  /// Line of the last key along `path`, found by scanning for each key in
  /// turn; array indices are skipped.
  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      if (!key.empty() && std::isdigit(static_cast<unsigned char>(key[0]))) continue;
      const std::string quoted = "\"" + key + "\"";
      std::size_t at = pos;
      while ((at = text_.find(quoted, at)) != std::string::npos) {
        std::size_t k = at + quoted.size();
        while (k < text_.size() && std::isspace(static_cast<unsigned char>(text_[k]))) ++k;
        if (k < text_.size() && text_[k] == ':') break;
        at += quoted.size();
      }
      if (at == std::string::npos) break;
      pos = at;
    }
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text_.size(); ++i) line += text_[i] == '\n';
    return line;
  }

 private:
  const std::string& text_;
};

using KeyPath = std::vector<std::string>;

void read_grid(const Reader& r, const json& g, RunConfig& cfg, const std::filesystem::path& base) {
  const KeyPath at{"grid"};
  r.known_keys(g, at, {"rect", "nx", "ny", "ntheta", "obstacles", "mask_file"});
  if (g.contains("mask_file")) {
    cfg.mask_file = base / r.string(g["mask_file"], {"grid", "mask_file"});
    if (!std::filesystem::exists(*cfg.mask_file)) {
      r.fail({"grid", "mask_file"}, "file not found: " + cfg.mask_file->string());
    }
  } else {
    const json& rect = r.field(g, at, "rect");
    if (!rect.is_array() || rect.size() != 2) r.fail({"grid", "rect"}, "expected [[x0, y0], [x1, y1]]");
    cfg.grid.lower = r.vec2(rect[0], {"grid", "rect"});
    cfg.grid.upper = r.vec2(rect[1], {"grid", "rect"});
    cfg.grid.nx = r.integer(r.field(g, at, "nx"), {"grid", "nx"});
    if (g.contains("ny")) {
      const json& ny = g["ny"];
      if (ny.is_string() && ny.get<std::string>() == "auto") {
        cfg.grid.ny = 0;
      } else {
        cfg.grid.ny = r.integer(ny, {"grid", "ny"});
        if (cfg.grid.ny < 1) r.fail({"grid", "ny"}, "must be >= 1 or \"auto\"");
      }
    }
  }
  if (g.contains("ntheta")) cfg.grid.ntheta = r.integer(g["ntheta"], {"grid", "ntheta"});
  if (g.contains("obstacles")) {
    const json& obs = g["obstacles"];
    if (!obs.is_array()) r.fail({"grid", "obstacles"}, "expected a list");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const KeyPath p{"grid", "obstacles", std::to_string(i)};
      const std::string type = r.string(r.field(obs[i], p, "type"), {"grid", "obstacles", "type"});
      if (type == "box") {
        r.known_keys(obs[i], p, {"type", "lower", "upper"});
        cfg.grid.obstacles.push_back(BoxObstacle{r.vec2(r.field(obs[i], p, "lower"), p),
                                                 r.vec2(r.field(obs[i], p, "upper"), p)});
      } else if (type == "disc") {
        r.known_keys(obs[i], p, {"type", "center", "radius"});
        cfg.grid.obstacles.push_back(DiscObstacle{r.vec2(r.field(obs[i], p, "center"), p),
                                                  r.number(r.field(obs[i], p, "radius"), p)});
      } else {
        r.fail({"grid", "obstacles", "type"}, "expected \"box\" or \"disc\"");
      }
    }
  }
}

void read_game(const Reader& r, const json& g, GameSpec& spec) {
  const KeyPath at{"game"};
  r.known_keys(g, at, {"model", "rho", "epsilon", "seed", "keypoint", "tau", "blur"});
  if (g.contains("model")) {
    try {
      spec.model = parse_mobility_model(r.string(g["model"], {"game", "model"}));
    } catch (const std::invalid_argument& e) {
      r.fail({"game", "model"}, e.what());
    }
  }
  if (g.contains("rho")) spec.rho = r.number(g["rho"], {"game", "rho"});
  if (g.contains("epsilon")) spec.epsilon = r.number(g["epsilon"], {"game", "epsilon"});
  if (g.contains("seed")) spec.seed = r.vec2(g["seed"], {"game", "seed"});
  if (g.contains("keypoint")) spec.keypoint = r.vec2(g["keypoint"], {"game", "keypoint"});
  if (g.contains("tau") && !g["tau"].is_null()) spec.tau = r.number(g["tau"], {"game", "tau"});
  if (g.contains("blur")) spec.blur = r.boolean(g["blur"], {"game", "blur"});
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(at, e.what());
  }
}

SensorConfig read_sensors(const Reader& r, const json& s, const std::filesystem::path& base) {
  const KeyPath at{"sensors"};
  const std::string type = r.string(r.field(s, at, "type"), {"sensors", "type"});
  if (type == "free") {
    r.known_keys(s, at, {"type"});
    return FreeModel{};
  }
  if (type == "paint") {
    r.known_keys(s, at, {"type", "density", "min", "max"});
    PaintField paint;
    if (s.contains("min")) paint.min_density = r.number(s["min"], {"sensors", "min"});
    if (s.contains("max")) paint.max_density = r.number(s["max"], {"sensors", "max"});
    const json& d = r.field(s, at, "density");
    const KeyPath dp{"sensors", "density"};
    if (d.is_number()) {
      paint.density = {d.get<double>()};
    } else if (d.is_array()) {
      for (const auto& v : d) paint.density.push_back(r.number(v, dp));
      if (paint.density.empty()) r.fail(dp, "empty density list");
    } else if (d.is_object()) {
      const auto file = base / r.string(r.field(d, dp, "map"), dp);
      try {
        paint.density = read_map(file.parent_path() / file.stem()).values;
      } catch (const std::exception& e) {
        r.fail(dp, e.what());
      }
    } else {
      r.fail(dp, "expected a number, a list or {\"map\": file}");
    }
    return paint;
  }
  if (type == "camera") {
    r.known_keys(s, at, {"type", "points", "background", "cost_cap"});
    CameraSet cams;
    cams.points = r.points(r.field(s, at, "points"), {"sensors", "points"});
    if (s.contains("background")) cams.background = r.number(s["background"], {"sensors", "background"});
    if (s.contains("cost_cap")) cams.cost_cap = r.number(s["cost_cap"], {"sensors", "cost_cap"});
    return cams;
  }
  if (type == "radar") {
    r.known_keys(s, at, {"type", "points", "delta", "box", "cost_cap"});
    RadarSet radars;
    radars.points = r.points(r.field(s, at, "points"), {"sensors", "points"});
    if (s.contains("delta")) radars.delta = r.number(s["delta"], {"sensors", "delta"});
    if (s.contains("box")) {
      const auto box = r.points(s["box"], {"sensors", "box"});
      if (box.size() != 2) r.fail({"sensors", "box"}, "expected [[x0, y0], [x1, y1]]");
      radars.box_lower = box[0];
      radars.box_upper = box[1];
    }
    if (s.contains("cost_cap")) radars.cost_cap = r.number(s["cost_cap"], {"sensors", "cost_cap"});
    return radars;
  }
  r.fail({"sensors", "type"}, "expected \"free\", \"paint\", \"camera\" or \"radar\"");
}

void read_optimize(const Reader& r, const json& o, AscentConfig& a) {
  const KeyPath at{"optimize"};
  r.known_keys(o, at, {"max_iterations", "memory", "gradient_tolerance", "armijo", "backtrack", "max_backtracks"});
  if (o.contains("max_iterations")) a.max_iterations = r.integer(o["max_iterations"], {"optimize", "max_iterations"});
  if (o.contains("memory")) a.memory = r.integer(o["memory"], {"optimize", "memory"});
  if (o.contains("gradient_tolerance")) {
    a.gradient_tolerance = r.number(o["gradient_tolerance"], {"optimize", "gradient_tolerance"});
  }
  if (o.contains("armijo")) a.armijo = r.number(o["armijo"], {"optimize", "armijo"});
  if (o.contains("backtrack")) a.backtrack = r.number(o["backtrack"], {"optimize", "backtrack"});
  if (o.contains("max_backtracks")) a.max_backtracks = r.integer(o["max_backtracks"], {"optimize", "max_backtracks"});
  try {
    a.validate(0);
  } catch (const std::invalid_argument& e) {
    r.fail(at, e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw ConfigError("config:" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  const Reader r(text);
  RunConfig cfg;
  r.known_keys(doc, {}, {"schema_version", "grid", "game", "sensors", "optimize", "gradient_check", "stencil_dump"});
  cfg.schema_version = r.integer(r.field(doc, {}, "schema_version"), {"schema_version"});
  if (cfg.schema_version != kSchemaVersion) {
    r.fail({"schema_version"}, "unsupported schema version " + std::to_string(cfg.schema_version) +
                                   " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  read_grid(r, r.field(doc, {}, "grid"), cfg, base_dir);
  if (doc.contains("game")) read_game(r, doc["game"], cfg.game);
  if (doc.contains("sensors")) cfg.sensors = read_sensors(r, doc["sensors"], base_dir);
  if (doc.contains("optimize")) read_optimize(r, doc["optimize"], cfg.ascent);
  if (doc.contains("gradient_check")) {
    const json& g = doc["gradient_check"];
    r.known_keys(g, {"gradient_check"}, {"coordinates", "step", "tolerance"});
    auto& c = cfg.gradient_check;
    if (g.contains("coordinates")) c.coordinates = r.integer(g["coordinates"], {"gradient_check", "coordinates"});
    if (g.contains("step")) c.step = r.number(g["step"], {"gradient_check", "step"});
    if (g.contains("tolerance")) c.tolerance = r.number(g["tolerance"], {"gradient_check", "tolerance"});
    if (c.coordinates < 1 || !(c.step > 0.0) || !(c.tolerance > 0.0)) {
      r.fail({"gradient_check"}, "coordinates, step and tolerance must be positive");
    }
  }
  if (doc.contains("stencil_dump")) {
    const json& s = doc["stencil_dump"];
    const KeyPath at{"stencil_dump"};
    r.known_keys(s, at, {"node", "dual_tensor"});
    if (s.contains("node")) {
      const json& n = s["node"];
      if (!n.is_array() || n.size() < 2 || n.size() > 3) r.fail({"stencil_dump", "node"}, "expected [i, j] or [i, j, k]");
      MultiIndex idx{0, 0, 0};
      for (std::size_t i = 0; i < n.size(); ++i) idx[i] = r.integer(n[i], {"stencil_dump", "node"});
      cfg.stencil_dump.node = idx;
    }
    if (s.contains("dual_tensor")) {
      const auto rows = r.points(s["dual_tensor"], {"stencil_dump", "dual_tensor"});
      if (rows.size() != 2) r.fail({"stencil_dump", "dual_tensor"}, "expected a 2x2 matrix");
      cfg.stencil_dump.dual_tensor = Matrix2{{{rows[0][0], rows[0][1]}, {rows[1][0], rows[1][1]}}};
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::string text;
  try {
    text = read_text(file);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_run_config(text, file.parent_path());
}

Grid make_grid(const RunConfig& config) {
  try {
    Grid grid = [&] {
      if (!config.mask_file) return Grid::build(config.grid);
      Grid masked = read_mask(*config.mask_file, config.grid.ntheta);
      if (config.grid.obstacles.empty()) return masked;
      // Obstacles listed next to a mask are stamped on top of it.
      std::vector<std::uint8_t> planar(masked.mask().begin(),
                                       masked.mask().begin() + static_cast<long>(masked.planar_size()));
      for (std::size_t c = 0; c < planar.size(); ++c) {
        const Point p = masked.point_of_index(masked.unflat(c));
        for (const auto& o : config.grid.obstacles) {
          if (contains(o, {p[0], p[1]})) planar[c] = 1;
        }
      }
      return Grid::from_mask(masked.lower(), masked.upper(), masked.dims()[0], masked.dims()[1],
                             config.grid.ntheta, planar);
    }();
    validate_sensors(resolve_sensors(config, grid), grid, config.game.model);
    return grid;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

SensorConfig resolve_sensors(const RunConfig& config, const Grid& grid) {
  SensorConfig sensors = config.sensors;
  if (auto* paint = std::get_if<PaintField>(&sensors); paint && paint->density.size() == 1) {
    paint->density.assign(grid.planar_size(), paint->density[0]);
  }
  return sensors;
}

json to_json(const GameSpec& spec) {
  json j = {{"model", to_string(spec.model)},
            {"rho", spec.rho},
            {"epsilon", spec.epsilon},
            {"seed", {spec.seed[0], spec.seed[1]}},
            {"keypoint", {spec.keypoint[0], spec.keypoint[1]}},
            {"blur", spec.blur}};
  j["tau"] = spec.tau ? json(*spec.tau) : json(nullptr);
  return j;
}

json to_json(const SensorConfig& sensors) {
  const auto pts = [](const std::vector<Vec2>& v) {
    json out = json::array();
    for (const auto& p : v) out.push_back({p[0], p[1]});
    return out;
  };
  return std::visit(
      [&](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FreeModel>) {
          return {{"type", "free"}};
        } else if constexpr (std::is_same_v<T, PaintField>) {
          return {{"type", "paint"}, {"min", s.min_density}, {"max", s.max_density}, {"density", s.density}};
        } else if constexpr (std::is_same_v<T, CameraSet>) {
          return {{"type", "camera"}, {"points", pts(s.points)}, {"background", s.background},
                  {"cost_cap", s.cost_cap}};
        } else {
          return {{"type", "radar"},
                  {"points", pts(s.points)},
                  {"delta", s.delta},
                  {"box", {{s.box_lower[0], s.box_lower[1]}, {s.box_upper[0], s.box_upper[1]}}},
                  {"cost_cap", s.cost_cap}};
        }
      },
      sensors);
}

json to_json(const RunConfig& config) {
  json grid = json::object();
  if (config.mask_file) {
    grid["mask_file"] = config.mask_file->string();
  } else {
    grid["rect"] = {{config.grid.lower[0], config.grid.lower[1]}, {config.grid.upper[0], config.grid.upper[1]}};
    grid["nx"] = config.grid.nx;
    grid["ny"] = config.grid.ny == 0 ? json("auto") : json(config.grid.ny);
  }
  grid["ntheta"] = config.grid.ntheta;
  json obstacles = json::array();
  for (const auto& o : config.grid.obstacles) {
    if (const auto* b = std::get_if<BoxObstacle>(&o)) {
      obstacles.push_back({{"type", "box"}, {"lower", {b->lower[0], b->lower[1]}}, {"upper", {b->upper[0], b->upper[1]}}});
    } else {
      const auto& d = std::get<DiscObstacle>(o);
      obstacles.push_back({{"type", "disc"}, {"center", {d.center[0], d.center[1]}}, {"radius", d.radius}});
    }
  }
  grid["obstacles"] = obstacles;
  const auto& a = config.ascent;
  return {{"schema_version", config.schema_version},
          {"grid", grid},
          {"game", to_json(config.game)},
          {"sensors", to_json(config.sensors)},
          {"optimize",
           {{"max_iterations", a.max_iterations},
            {"memory", a.memory},
            {"gradient_tolerance", a.gradient_tolerance},
            {"armijo", a.armijo},
            {"backtrack", a.backtrack},
            {"max_backtracks", a.max_backtracks}}}};
}

}  // namespace eikgame
