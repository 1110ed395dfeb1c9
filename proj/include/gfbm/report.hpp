#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gfbm {

/// Shortest round-trip form limited to 17 significant digits ("%.17g").
std::string format_number(double value);

/// Writes the file in one go; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

struct CsvTable {
  std::string header;  // comma separated, no trailing newline
  std::vector<std::vector<std::string>> rows;
};

/// Throws IoError("nothing to emit") for a table without rows.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool step = false;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;
  /// Stored in a <metadata> element (the CLI puts the config digest here).
  std::string metadata;
};

/// Self-contained SVG line chart. Throws IoError("nothing to emit") when no
/// series has a plottable point.
std::string render_svg(const SvgChart& chart);

struct ManifestFile {
  std::string name;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version;
  nlohmann::json config;
  double wall_time_seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<ManifestFile> files;
};

nlohmann::json to_json(const RunManifest& manifest);

/// Hashes every listed file in `dir` and writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest,
                    const std::vector<std::string>& file_names);

} // namespace gfbm
