#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fpcav::app {

/// Numeric table written as RFC-4180 CSV with `#` comment lines above the column row.
struct Table {
  std::vector<std::string> header;  // comment lines, without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
  void write(std::ostream& os) const;
};

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);
/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

}  // namespace fpcav::app
