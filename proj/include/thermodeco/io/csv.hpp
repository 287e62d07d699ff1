#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace thermodeco::io {

using Cell = std::variant<double, std::string>;

/// A CSV table with `# key: value` metadata lines ahead of the header row.
/// Numbers are written with 17 significant digits so that reading a file
/// back reproduces the table exactly. Strings that would otherwise read back
/// as numbers, or that contain separators, are quoted.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
  /// First metadata value for key; throws std::out_of_range if absent.
  const std::string& meta(const std::string& key) const;

  bool operator==(const Table&) const = default;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g; NaN is rejected since emitted tables never contain it.
std::string format_number(double value);

void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);
void write_csv_file(const std::filesystem::path& path, const Table& table);

Table read_csv(std::istream& in);
Table parse_csv(const std::string& text);
Table read_csv_file(const std::filesystem::path& path);

}  // namespace thermodeco::io
