#pragma once

#include <string>
#include <vector>

namespace groupanno {

/// Parsed CSV contents: a header row plus data rows of equal width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for a header name, or -1 when absent.
  int column(const std::string& name) const;
};

/// Parse one CSV line into fields. Supports RFC-4180 style double-quoted
/// fields (embedded commas/quotes); a trailing CR is stripped.
std::vector<std::string> split_csv_line(const std::string& line);

/// Read a whole CSV file (UTF-8, header row required, LF or CRLF endings).
/// Throws std::runtime_error with a line number on structural problems.
CsvTable read_csv(const std::string& path);

/// Quote a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

/// Write rows (header first) as CSV with LF endings.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Format a double with enough digits (17 significant) to round-trip exactly.
std::string format_double(double v);

}  // namespace groupanno
