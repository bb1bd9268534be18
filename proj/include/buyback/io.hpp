#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace buyback::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws DataError when absent.
  std::size_t columnIndex(std::string_view name) const;
  bool hasColumn(std::string_view name) const;
};

CsvTable parseCsv(std::istream& in);
CsvTable readCsv(const std::filesystem::path& path);
void writeCsv(std::ostream& out, const CsvTable& table);
void writeCsv(const std::filesystem::path& path, const CsvTable& table);

/// Throws DataError unless the file's header equals `expected` and every row
/// has the header's width.
void validateCsv(const std::filesystem::path& path, const std::vector<std::string>& expected);

/// Shortest representation that parses back to the same double; empty for NaN.
std::string formatNumber(double value);
std::string formatFixed(double value, int digits);
/// Empty or "NA" parses as NaN.
double parseNumber(std::string_view text);

std::vector<nlohmann::json> readJsonl(const std::filesystem::path& path);
void writeJsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

std::string readText(const std::filesystem::path& path);
void writeText(const std::filesystem::path& path, std::string_view text);

}  // namespace buyback::io
