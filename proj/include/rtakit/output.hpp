#pragma once

#include "rtakit/harness.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rta {

/// `t,x0..,ud0..,ua0..,intervened,margin,mode` for the given dimensions.
std::string csv_header(int n, int m);

/// Per-step rows with 17 significant digits, followed by `# key=value` summary lines.
void write_csv(std::ostream & os, const RunResult & run);
void write_json(std::ostream & os, const RunResult & run);

struct CsvTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> modes;
  /// Summary lines without the leading "# ".
  std::vector<std::string> summary;
};

/// Parses write_csv output. Malformed input raises UsageError.
CsvTable parse_csv(std::istream & is);

/// Prints a double with 17 significant digits.
std::string format_double(double v);

}  // namespace rta
