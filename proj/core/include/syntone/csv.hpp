#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace syntone::csv {

/// Minimal comma-separated table: no quoting, first line is the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for `name`; throws std::runtime_error if absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Shortest representation that round-trips.
std::string format_double(double v);
/// Fixed notation with `digits` decimals.
std::string format_fixed(double v, int digits);

int parse_int(std::string_view text);
double parse_double(std::string_view text);

}  // namespace syntone::csv
