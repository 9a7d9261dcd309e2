#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "eikgame/games.hpp"
#include "eikgame/grid.hpp"
#include "eikgame/optimize.hpp"
#include "eikgame/selling.hpp"

namespace eikgame {

inline constexpr int kSchemaVersion = 1;

struct GradientCheckOptions {
  int coordinates = 10;
  /// Central-difference step, relative to max(1, |parameter|).
  double step = 1e-6;
  double tolerance = 1e-4;
};

struct StencilDumpOptions {
  std::optional<MultiIndex> node;
  /// Riemannian dual tensor override; defaults to the sensor metric.
  std::optional<Matrix2> dual_tensor;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  GridSpec grid;
  /// Mask header resolved against the config directory; replaces obstacles.
  std::optional<std::filesystem::path> mask_file;
  GameSpec game;
  SensorConfig sensors = FreeModel{};
  AscentConfig ascent;
  GradientCheckOptions gradient_check;
  StencilDumpOptions stencil_dump;
};

/// Parses and validates a config document. Errors are ConfigError with a
/// "config:LINE: /json/pointer: message" diagnostic.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& file);

/// Throws ConfigError when the grid cannot be built or the sensors do not fit.
Grid make_grid(const RunConfig& config);

/// Sensors with a scalar paint density broadcast over the planar grid.
SensorConfig resolve_sensors(const RunConfig& config, const Grid& grid);

nlohmann::json to_json(const GameSpec& spec);
nlohmann::json to_json(const SensorConfig& sensors);
nlohmann::json to_json(const RunConfig& config);

}  // namespace eikgame
