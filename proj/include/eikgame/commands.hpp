#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "eikgame/config.hpp"

namespace eikgame {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  bool plot = false;
  bool check_gradient = false;
  std::uint64_t seed = 0;
  /// Overrides the config's stencil_dump node.
  std::optional<MultiIndex> node;
};

/// Each command writes its files under out_dir and returns the process exit
/// code (0, or 3 for a numerical failure it reports itself). ConfigError and
/// NumericalError propagate.
int cmd_solve(const RunConfig& config, const CommandOptions& options);
int cmd_gradient(const RunConfig& config, const CommandOptions& options);
int cmd_optimize(const RunConfig& config, const CommandOptions& options);
int cmd_stencil_dump(const RunConfig& config, const CommandOptions& options);

struct GradientCheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct GradientCheck {
  std::vector<GradientCheckEntry> entries;
  bool passed = true;
};

/// Central differences on `count` coordinates drawn with `seed` from the
/// coordinates whose analytic derivative is at least 1e-3 of the largest one
/// (all coordinates when there are fewer). Camera visibility is frozen at the unperturbed placement and
/// paint bounds are relaxed so that steps may leave the admissible box.
GradientCheck check_gradient(const SensorConfig& sensors, const GameSpec& spec, const Grid& grid,
                             const GradientCheckOptions& options, std::uint64_t seed);

}  // namespace eikgame
