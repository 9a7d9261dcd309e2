#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eikgame/eikonal.hpp"
#include "eikgame/geodesic.hpp"
#include "eikgame/grid.hpp"
#include "eikgame/optimize.hpp"
#include "eikgame/stencils.hpp"

namespace eikgame {

/// Flat little-endian float64 array plus a JSON sidecar header.
///
/// `<stem>.bin` holds the values in flat grid order (x fastest); `<stem>.json`
/// holds {"format", "count", "dims", "steps", "seeds", ...extra}.
struct MapHeader {
  std::vector<int> dims;
  std::vector<double> steps;
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json extra = nlohmann::json::object();
};

void write_map(const std::filesystem::path& stem, std::span<const double> values,
               const MapHeader& header);

struct LoadedMap {
  MapHeader header;
  std::vector<double> values;
};

/// Throws std::runtime_error on missing files or a count mismatch.
LoadedMap read_map(const std::filesystem::path& stem);

MapHeader map_header(const Grid& grid, bool planar, const SeedSet& seeds = {});

/// Fixed 17-significant-digit formatting, identical across runs.
std::string format_double(double v);

/// JSON text with every float printed by format_double; non-finite floats
/// become null. Object keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// CSV with header x,y[,theta],cumulative_cost.
void write_path_csv(const std::filesystem::path& file, const Path& path);
Path read_path_csv(const std::filesystem::path& file);

/// CSV with header iteration,value,step,gradient_norm.
void write_log_csv(const std::filesystem::path& file, std::span<const AscentRecord> history);

/// Obstacle mask import: JSON header {"dims": [nx, ny], "rect": [[x0, y0],
/// [x1, y1]]} next to a row-major byte file (0 free, 1 masked). The byte file
/// is `<stem>.bin` unless the header names it under "data".
Grid read_mask(const std::filesystem::path& header_file, int ntheta);
void write_mask(const std::filesystem::path& stem, const Grid& grid);

nlohmann::json to_json(const StencilDump& dump);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace eikgame
