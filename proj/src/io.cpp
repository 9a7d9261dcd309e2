#include "eikgame/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eikgame {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

nlohmann::json matrix_json(const Matrix3& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : m) out.push_back({row[0], row[1], row[2]});
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (v == kUnreached) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_into(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump_into(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short arrays of scalars stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& v : j) flat = flat && !v.is_structured();
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat && indent > 0 ? ", " : ",";
        if (!flat) newline(depth + 1);
        dump_into(j[i], indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MapHeader map_header(const Grid& grid, bool planar, const SeedSet& seeds) {
  MapHeader h;
  const auto& d = grid.dims();
  const auto& s = grid.steps();
  h.dims = {d[0], d[1]};
  h.steps = {s[0], s[1]};
  if (!planar && grid.has_angle()) {
    h.dims.push_back(d[2]);
    h.steps.push_back(s[2]);
  }
  for (const auto& seed : seeds) {
    const MultiIndex idx = grid.unflat(seed.node);
    nlohmann::json j = {{"index", {idx[0], idx[1], idx[2]}}, {"value", seed.value}};
    h.seeds.push_back(j);
  }
  h.extra["rect"] = {{grid.lower()[0], grid.lower()[1]}, {grid.upper()[0], grid.upper()[1]}};
  return h;
}

void write_map(const std::filesystem::path& stem, std::span<const double> values,
               const MapHeader& header) {
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem.string() + ".bin");
  for (const double v : values) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(v));
    bin.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  nlohmann::json j = header.extra;
  j["format"] = "float64-le";
  j["count"] = values.size();
  j["dims"] = header.dims;
  j["steps"] = header.steps;
  j["seeds"] = header.seeds;
  write_text(with_suffix(stem, ".json"), dump_json(j) + "\n");
}

LoadedMap read_map(const std::filesystem::path& stem) {
  LoadedMap out;
  const auto j = nlohmann::json::parse(read_text(with_suffix(stem, ".json")));
  out.header.dims = j.at("dims").get<std::vector<int>>();
  out.header.steps = j.at("steps").get<std::vector<double>>();
  out.header.seeds = j.value("seeds", nlohmann::json::array());
  out.header.extra = j;
  const auto count = j.at("count").get<std::size_t>();
  const std::string raw = read_text(with_suffix(stem, ".bin"));
  if (raw.size() != count * 8) throw std::runtime_error("map: byte count does not match header");
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t le;
    std::memcpy(&le, raw.data() + 8 * i, 8);
    out.values[i] = std::bit_cast<double>(to_little_endian(le));
  }
  return out;
}

void write_path_csv(const std::filesystem::path& file, const Path& path) {
  std::string text = path.angular ? "x,y,theta,cumulative_cost\n" : "x,y,cumulative_cost\n";
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const auto& p = path.points[i];
    text += format_double(p[0]) + "," + format_double(p[1]) + ",";
    if (path.angular) text += format_double(p[2]) + ",";
    text += format_double(path.cumulative_cost[i]) + "\n";
  }
  write_text(file, text);
}

Path read_path_csv(const std::filesystem::path& file) {
  std::istringstream in(read_text(file));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("path csv: empty file");
  Path path;
  path.angular = line.rfind("x,y,theta,", 0) == 0;
  const std::size_t cols = path.angular ? 4 : 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) v.push_back(cell == "inf" ? kUnreached : std::stod(cell));
    if (v.size() != cols) throw std::runtime_error("path csv: wrong column count");
    path.points.push_back({v[0], v[1], path.angular ? v[2] : 0.0});
    path.cumulative_cost.push_back(v[cols - 1]);
  }
  return path;
}

void write_log_csv(const std::filesystem::path& file, std::span<const AscentRecord> history) {
  std::string text = "iteration,value,step,gradient_norm\n";
  for (const auto& r : history) {
    text += std::to_string(r.iteration) + "," + format_double(r.value) + "," +
            format_double(r.step) + "," + format_double(r.gradient_norm) + "\n";
  }
  write_text(file, text);
}

Grid read_mask(const std::filesystem::path& header_file, int ntheta) {
  const auto j = nlohmann::json::parse(read_text(header_file));
  const auto dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() != 2) throw std::invalid_argument("mask: dims must have two entries");
  const auto rect = j.at("rect").get<std::vector<std::vector<double>>>();
  if (rect.size() != 2 || rect[0].size() != 2 || rect[1].size() != 2) {
    throw std::invalid_argument("mask: rect must be [[x0, y0], [x1, y1]]");
  }
  std::filesystem::path data = header_file;
  data.replace_extension(".bin");
  if (j.contains("data")) data = header_file.parent_path() / j.at("data").get<std::string>();
  const std::string raw = read_text(data);
  std::vector<std::uint8_t> mask(raw.begin(), raw.end());
  return Grid::from_mask({rect[0][0], rect[0][1]}, {rect[1][0], rect[1][1]}, dims[0], dims[1],
                         ntheta, mask);
}

void write_mask(const std::filesystem::path& stem, const Grid& grid) {
  const std::vector<std::uint8_t> planar(grid.mask().begin(),
                                         grid.mask().begin() + static_cast<long>(grid.planar_size()));
  write_text(with_suffix(stem, ".bin"), std::string(planar.begin(), planar.end()));
  nlohmann::json j = {{"dims", {grid.dims()[0], grid.dims()[1]}},
                      {"rect", {{grid.lower()[0], grid.lower()[1]}, {grid.upper()[0], grid.upper()[1]}}}};
  write_text(with_suffix(stem, ".json"), dump_json(j) + "\n");
}

nlohmann::json to_json(const StencilDump& dump) {
  nlohmann::json controls = nlohmann::json::array();
  for (std::size_t c = 0; c < dump.stencil.controls.size(); ++c) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : dump.stencil.controls[c].entries) {
      entries.push_back({{"offset", {e.offset[0], e.offset[1], e.offset[2]}}, {"weight", e.weight}});
    }
    controls.push_back({{"entries", entries},
                        {"realized_tensor", matrix_json(dump.realized[c])},
                        {"intended_tensor", matrix_json(dump.intended[c])}});
  }
  return {{"model", to_string(dump.model)},
          {"node", {dump.node[0], dump.node[1], dump.node[2]}},
          {"position", {dump.position[0], dump.position[1], dump.position[2]}},
          {"controls", controls},
          {"reconstruction_error", dump.reconstruction_error}};
}

}  // namespace eikgame
