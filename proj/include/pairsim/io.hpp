#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pairsim::io {

/// Full-precision decimal formatting (%.17g) used by every CSV/JSON writer
/// so identical runs produce identical bytes.
std::string format_double(double v);

/// Writes text to path, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

/// FNV-1a 64-bit hash, the input-content hash recorded in run records.
std::uint64_t fnv1a64(const std::string& data);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Minimal CSV reader: comma-separated, no quoting (none of the project's
/// files need it). Throws IoError naming the offending row on ragged input.
CsvTable read_csv(const std::string& path);

/// Simple polyline plot writer; one SVG, multiple named series.
struct SvgSeries {
  std::string label;
  std::string color = "#1f6fb2";
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace pairsim::io
