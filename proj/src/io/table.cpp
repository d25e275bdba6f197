#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/io.hpp"

namespace slowman {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw ConfigError("table row width does not match the column count");
  rows.push_back(std::move(row));
}

std::string Table::body() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_table(std::ostream& os, const Table& table) {
  const std::string body = table.body();
  for (const auto& [key, value] : table.meta) os << "# " << key << ' ' << value << '\n';
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(body)));
  os << "# content_fnv1a " << hash << '\n' << body;
}

Table read_table(std::istream& is) {
  Table t;
  std::string line;
  std::string expected_hash;
  std::string body;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls >> std::ws, value);
      if (key == "content_fnv1a") expected_hash = value;
      else t.meta[key] = value;
      continue;
    }
    body += line + '\n';
    std::istringstream ls(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ls, cell, ',')) t.columns.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("table: bad number '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) throw ConfigError("table: ragged row");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError("table: missing column header");
  if (!expected_hash.empty()) {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(body)));
    if (expected_hash != hash) throw ConfigError("table: content hash mismatch");
  }
  return t;
}

}  // namespace slowman
