#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace logcorr::cli {

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string, bool>;

struct Table {
  /// Emitted as a leading `# key=value ...` line in CSV and a "meta" object in JSON.
  std::vector<std::pair<std::string, Cell>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Shortest round-trip representation; non-finite values print as inf, -inf, nan.
std::string format_double(double v);
std::string format_cell(const Cell& c);

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);

}  // namespace logcorr::cli
