#include "osmmcl/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "osmmcl/error.hpp"

namespace osmmcl {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.emplace_back(first == std::string_view::npos ? std::string_view{} : cell.substr(first, last - first + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvReader::CsvReader(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw ParseError(path.string() + ": expected header " + expected, 1, 1);
  }
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": expected " + std::to_string(header.size()) + " columns", line_no, 1);
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[c]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(path.string() + ": invalid number '" + cell + "'", line_no, c + 1);
      }
    }
    rows_.push_back(std::move(row));
  }
}

}  // namespace osmmcl
