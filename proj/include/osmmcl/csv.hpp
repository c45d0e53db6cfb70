#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace osmmcl {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::vector<std::string> split_csv_line(std::string_view line);

/// Rows of a CSV file whose first line must equal `header` (comma-separated, trimmed).
/// Blank lines are skipped. Throws ParseError with the offending line.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const std::vector<std::string>& header);

  [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

}  // namespace osmmcl
