#include "gfbm/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "gfbm/errors.hpp"

namespace gfbm {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (table.rows.empty()) throw IoError("nothing to emit");
  std::string out = table.header + '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  write_text_file(path, out);
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

} // namespace

std::string render_svg(const SvgChart& chart) {
  auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return chart.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!chart.log_x || x > 0) && (!chart.log_y || y > 0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  std::size_t points = 0;
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      ++points;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (points == 0) throw IoError("nothing to emit");
  if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  constexpr double W = 720, H = 480, L = 80, R = 160, T = 40, B = 60;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<metadata>" << escape_xml(chart.metadata) << "</metadata>\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(chart.title)
    << "</text>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = L + (W - L - R) * k / 4.0;
    const double gy = H - B - (H - T - B) * k / 4.0;
    o << "<text x=\"" << gx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << short_number(chart.log_x ? std::pow(10.0, fx) : fx) << "</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
      << short_number(chart.log_y ? std::pow(10.0, fy) : fy) << "</text>\n"
      << "<line x1=\"" << gx << "\" y1=\"" << T << "\" x2=\"" << gx << "\" y2=\"" << H - B
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << escape_xml(chart.x_label) << (chart.log_x ? " (log)" : "") << "</text>\n"
    << "<text transform=\"translate(20," << T + (H - T - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& series = chart.series[s];
    const char* colour = kPalette[s % std::size(kPalette)];
    std::ostringstream path;
    bool started = false;
    double prev_y = 0.0;
    for (std::size_t i = 0; i < std::min(series.x.size(), series.y.size()); ++i) {
      if (!usable(series.x[i], series.y[i])) continue;
      const double X = px(series.x[i]);
      const double Y = py(series.y[i]);
      if (!started) {
        path << 'M' << X << ' ' << Y;
        started = true;
      } else if (series.step) {
        path << " L" << X << ' ' << prev_y << " L" << X << ' ' << Y;
      } else {
        path << " L" << X << ' ' << Y;
      }
      prev_y = Y;
    }
    if (!started) continue;
    o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n"
      << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << colour << "\">"
      << escape_xml(series.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}});
  return {{"schema", "gfbm-manifest-v1"},
          {"tool_version", m.tool_version},
          {"config", m.config},
          {"wall_time_seconds", m.wall_time_seconds},
          {"seeds", m.seeds},
          {"files", files}};
}

void write_manifest(const std::filesystem::path& dir, RunManifest manifest,
                    const std::vector<std::string>& file_names) {
  manifest.files.clear();
  for (const auto& name : file_names) manifest.files.push_back({name, sha256_file(dir / name)});
  write_text_file(dir / "manifest.json", to_json(manifest).dump(2) + '\n');
}

} // namespace gfbm
