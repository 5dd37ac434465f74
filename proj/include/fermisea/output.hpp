#pragma once

// Deterministic CSV/JSON emission: 9 significant digits, '.' decimal,
// newline-terminated rows, and a JSON provenance record (config hash, tool
// version, seed) so outputs are reproducible byte for byte.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fermisea/profile.hpp"
#include "fermisea/version.hpp"

namespace fermisea {

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const nlohmann::json& config) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

struct Provenance {
  std::string subcommand;
  std::string config_hash;
  std::string method;  // empty when the subcommand has no method choice
  std::uint64_t seed = 0;
  bool has_seed = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "fermisea";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["config_hash"] = config_hash;
    if (!method.empty()) j["method"] = method;
    if (has_seed) j["seed"] = seed;
    return j;
  }
};

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline std::string csv_from_table(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (const double* d = std::get_if<double>(&row[c]))
        out += format_g9(*d);
      else
        out += std::get<std::string>(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json json_from_table(const Table& table,
                                      const Provenance& prov) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      if (const double* d = std::get_if<double>(&cell))
        r.push_back(*d);
      else
        r.push_back(std::get<std::string>(cell));
    }
    rows.push_back(std::move(r));
  }
  nlohmann::json j;
  j["provenance"] = prov.to_json();
  j["columns"] = table.columns;
  j["rows"] = std::move(rows);
  return j;
}

// Writes <name>.csv plus <name>.csv.meta.json, or <name>.json with the
// provenance embedded.
inline void write_table(const std::filesystem::path& dir,
                        const std::string& name, const Table& table,
                        const Provenance& prov, const std::string& format) {
  if (format == "json") {
    write_text_file(dir / (name + ".json"),
                    json_from_table(table, prov).dump(2) + "\n");
    return;
  }
  write_text_file(dir / (name + ".csv"), csv_from_table(table));
  nlohmann::json meta;
  meta["provenance"] = prov.to_json();
  meta["columns"] = table.columns;
  write_text_file(dir / (name + ".csv.meta.json"), meta.dump(2) + "\n");
}

// Maps go out as raw CSV matrices (one grid row per line); the sidecar
// carries the geometry and units.
inline void write_matrix(const std::filesystem::path& dir,
                         const std::string& name, const ScalarMap2D& map,
                         const Provenance& prov, const std::string& units) {
  std::string out;
  for (std::size_t iy = 0; iy < map.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.nx; ++ix) {
      if (ix) out += ',';
      out += format_g9(map.at(ix, iy));
    }
    out += '\n';
  }
  write_text_file(dir / (name + ".csv"), out);
  nlohmann::json meta;
  meta["provenance"] = prov.to_json();
  meta["nx"] = map.nx;
  meta["ny"] = map.ny;
  meta["pixel_size_m"] = map.pixel_size;
  meta["origin_x_px"] = map.origin_x;
  meta["origin_y_px"] = map.origin_y;
  meta["units"] = units;
  write_text_file(dir / (name + ".csv.meta.json"), meta.dump(2) + "\n");
}

}  // namespace fermisea
