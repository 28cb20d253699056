#pragma once

// Plain-text output: locale-independent CSV tables with a '#' metadata
// preamble, and a small hand-written SVG line chart with a log-scaled x axis.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fkl::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest-safe general format with 12 significant digits, '.' decimal point.
inline std::string format_number(double value, int precision = 12) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, precision);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, decimals);
  return std::string(buf.data(), res.ptr);
}

using Cell = std::variant<std::monostate, double, std::int64_t, std::string, bool>;

inline std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

inline Cell optional_cell(const std::optional<double>& v) {
  return v ? Cell{*v} : Cell{std::monostate{}};
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width mismatch");
    rows.push_back(std::move(row));
  }

  [[nodiscard]] std::optional<std::size_t> column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline std::string to_csv(const Table& table, const std::vector<std::string>& preamble) {
  std::ostringstream out;
  for (const auto& line : preamble) out << "# " << line << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << contents;
  file.flush();
  if (!file) throw IoError("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with log10 x axis. Points with non-positive x are dropped.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<Series>& series,
                                  std::vector<std::string> comments = {}) {
  constexpr double width = 800, height = 500;
  constexpr double left = 80, right = 200, top = 50, bottom = 60;
  static constexpr std::array<const char*, 6> palette = {"#000000", "#1f77b4", "#d62728",
                                                         "#2ca02c", "#9467bd", "#ff7f0e"};
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = 0.0, y_hi = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, std::log10(s.x[i]));
      x_hi = std::max(x_hi, std::log10(s.x[i]));
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (x_hi - x_lo < 1e-9) x_hi = x_lo + 1.0;
  if (!std::isfinite(y_hi) || y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };
  auto f2 = [](double v) { return format_fixed(v, 2); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const auto& c : comments) svg << "<!-- " << c << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f2(left + plot_w / 2) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top + plot_h) << "\" x2=\"" << f2(left + plot_w)
      << "\" y2=\"" << f2(top + plot_h) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top) << "\" x2=\"" << f2(left)
      << "\" y2=\"" << f2(top + plot_h) << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(x_lo - 1e-9)); e <= static_cast<int>(std::floor(x_hi + 1e-9)); ++e) {
    const double x = px(e);
    svg << "<line x1=\"" << f2(x) << "\" y1=\"" << f2(top + plot_h) << "\" x2=\"" << f2(x) << "\" y2=\""
        << f2(top + plot_h + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << f2(x) << "\" y=\"" << f2(top + plot_h + 20) << "\" text-anchor=\"middle\">1e"
        << e << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double y = y_lo + (y_hi - y_lo) * k / 5.0;
    svg << "<line x1=\"" << f2(left - 5) << "\" y1=\"" << f2(py(y)) << "\" x2=\"" << f2(left)
        << "\" y2=\"" << f2(py(y)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << f2(left - 8) << "\" y=\"" << f2(py(y) + 4) << "\" text-anchor=\"end\">"
        << format_number(y, 3) << "</text>\n";
  }
  svg << "<text x=\"" << f2(left + plot_w / 2) << "\" y=\"" << f2(height - 15)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"20\" y=\"" << f2(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << f2(top + plot_h / 2) << ")\">" << y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = palette[k % palette.size()];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      svg << (first ? "" : " ") << f2(px(std::log10(s.x[i]))) << ',' << f2(py(s.y[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = top + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << f2(left + plot_w + 15) << "\" y1=\"" << f2(ly) << "\" x2=\""
        << f2(left + plot_w + 40) << "\" y2=\"" << f2(ly) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << f2(left + plot_w + 45) << "\" y=\"" << f2(ly + 4) << "\">" << s.name
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fkl::io
