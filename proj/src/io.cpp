#include "pairsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pairsim/errors.hpp"

namespace pairsim::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size())
        throw IoError(path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.header.empty()) throw IoError(path + ": empty CSV");
  return table;
}

namespace {

struct AxisScale {
  double lo = 0.0, hi = 1.0;
  double to_px(double v, double px_lo, double px_hi) const {
    const double f = (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
    return px_lo + f * (px_hi - px_lo);
  }
};

AxisScale fit_axis(const std::vector<SvgSeries>& series, bool use_x) {
  AxisScale ax;
  bool first = true;
  for (const auto& s : series) {
    const auto& v = use_x ? s.x : s.y;
    for (double val : v) {
      if (!std::isfinite(val)) continue;
      if (first) {
        ax.lo = ax.hi = val;
        first = false;
      } else {
        ax.lo = std::min(ax.lo, val);
        ax.hi = std::max(ax.hi, val);
      }
    }
  }
  if (first) return ax;
  if (ax.hi == ax.lo) {
    ax.lo -= 0.5;
    ax.hi += 0.5;
  }
  const double pad = 0.05 * (ax.hi - ax.lo);
  ax.lo -= pad;
  ax.hi += pad;
  return ax;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
  const double w = 720, h = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const AxisScale ax = fit_axis(series, true);
  const AxisScale ay = fit_axis(series, false);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
      << "\" height=\"" << h - mt - mb
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
         " transform=\"rotate(-90 18 " << h / 2 << ")\">" << y_label
      << "</text>\n";

  // Axis extent labels keep the plot readable without a full tick engine.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", ax.lo);
  out << "<text x=\"" << ml << "\" y=\"" << h - mb + 18
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.6g", ax.hi);
  out << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.6g", ay.lo);
  out << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.6g", ay.hi);
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 11
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";

  double legend_y = mt + 16;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double px = ax.to_px(s.x[i], ml, w - mr);
      const double py = ay.to_px(s.y[i], h - mb, mt);
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
      out << buf;
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<line x1=\"" << w - mr - 150 << "\" y1=\"" << legend_y - 4
          << "\" x2=\"" << w - mr - 126 << "\" y2=\"" << legend_y - 4
          << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << w - mr - 120 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
          << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace pairsim::io
