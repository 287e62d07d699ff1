#include "thermodeco/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace thermodeco::io {

namespace {

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') return false;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool needs_quotes(const std::string& s) {
  double dummy = 0.0;
  return s.find_first_of(",\"\n\r") != std::string::npos || parse_number(s, dummy) ||
         (!s.empty() && s.front() == '#');
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

// Splits one record, honouring quotes. Reports which cells were quoted.
std::vector<std::pair<std::string, bool>> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::pair<std::string, bool>> cells;
  std::string cur;
  bool quoted = false;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty() && !quoted) {
      in_quotes = quoted = true;
    } else if (c == ',') {
      cells.emplace_back(std::move(cur), quoted);
      cur.clear();
      quoted = false;
    } else {
      if (quoted) throw CsvError("line " + std::to_string(line_no) + ": text after closing quote");
      cur += c;
    }
  }
  if (in_quotes) throw CsvError("line " + std::to_string(line_no) + ": unterminated quote");
  cells.emplace_back(std::move(cur), quoted);
  return cells;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw CsvError("row has " + std::to_string(row.size()) + " cells, table has " +
                   std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column named '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const double* v = std::get_if<double>(&c)) return *v;
  throw CsvError("column '" + name + "' row " + std::to_string(row) + " is not numeric");
}

const std::string& Table::text(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const std::string* v = std::get_if<std::string>(&c)) return *v;
  throw CsvError("column '" + name + "' row " + std::to_string(row) + " is not text");
}

const std::string& Table::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  throw std::out_of_range("no metadata entry '" + key + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) throw CsvError("refusing to write NaN");
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const Table& table) {
  for (const auto& [key, value] : table.metadata) {
    if (key.find_first_of(":\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw CsvError("metadata entries must be single-line and keys must not contain ':'");
    }
    out << "# " << key << ": " << value << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << (needs_quotes(table.columns[i]) ? quote(table.columns[i]) : table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (const double* v = std::get_if<double>(&row[i])) {
        out << format_number(*v);
      } else {
        const auto& s = std::get<std::string>(row[i]);
        out << (needs_quotes(s) ? quote(s) : s);
      }
    }
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

void write_csv_file(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw CsvError("write to " + path.string() + " failed");
}

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header && line.rfind('#', 0) == 0) {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      const auto colon = body.find(':');
      if (colon == std::string::npos) {
        table.metadata.emplace_back(body, "");
      } else {
        std::string value = body.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        table.metadata.emplace_back(body.substr(0, colon), value);
      }
      continue;
    }
    if (!header) {
      for (auto& [name, q] : split_record(line, line_no)) table.columns.push_back(std::move(name));
      header = true;
      continue;
    }
    auto cells = split_record(line, line_no);
    if (cells.size() != table.columns.size()) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(table.columns.size()) + " cells, found " +
                     std::to_string(cells.size()));
    }
    std::vector<Cell> row;
    row.reserve(cells.size());
    for (auto& [s, quoted] : cells) {
      double v = 0.0;
      if (!quoted && parse_number(s, v)) {
        row.emplace_back(v);
      } else {
        row.emplace_back(std::move(s));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header) throw CsvError("missing header row");
  return table;
}

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

Table read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace thermodeco::io
