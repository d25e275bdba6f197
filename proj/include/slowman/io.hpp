#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slowman {

/// Shortest round-trip representation ("%.17g").
[[nodiscard]] std::string format_double(double v);

/// 64-bit FNV-1a hash.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);

/// Columnar text table: `# key value` metadata lines (sorted by key, plus a
/// content hash of the body), a `#`-free header row of column names, then
/// comma-separated rows.
struct Table {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  [[nodiscard]] std::string body() const;
};

void write_table(std::ostream& os, const Table& table);
/// Throws ConfigError on malformed input or a hash mismatch.
[[nodiscard]] Table read_table(std::istream& is);

}  // namespace slowman
