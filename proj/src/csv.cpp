#include "csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace mfdp {

namespace {

std::string trim_cell(std::string s) {
  while (!s.empty() && (s.back() == '\r' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  s.erase(0, b);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      cells.push_back(trim_cell(line.substr(start)));
      break;
    }
    cells.push_back(trim_cell(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_number(const std::string& cell, double* out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "line %zu: %s", line_no, what.c_str());
  throw ParseError(buf);
}

}  // namespace

std::vector<double> read_numeric_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (in.bad()) throw IoError("read failure: " + path);

  // drop trailing blank lines, keep interior ones as errors
  while (!lines.empty() && trim_cell(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("line 1: no data rows");

  const char delim = lines[0].find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> first = split_row(lines[0], delim);

  bool has_header = false;
  for (const auto& cell : first) {
    double ignored;
    if (!parse_number(cell, &ignored)) {
      has_header = true;
      break;
    }
  }

  std::size_t col = 0;
  if (column.empty()) {
    if (first.size() != 1) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "file has %zu columns; select one by name or 1-based index", first.size());
      throw ParseError(buf);
    }
  } else if (std::all_of(column.begin(), column.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) &&
             !column.empty()) {
    const long idx = std::strtol(column.c_str(), nullptr, 10);
    if (idx < 1 || static_cast<std::size_t>(idx) > first.size()) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "column index %ld out of range (file has %zu columns)", idx, first.size());
      throw ParseError(buf);
    }
    col = static_cast<std::size_t>(idx) - 1;
  } else {
    if (!has_header) throw ParseError("no header row; select the column by 1-based index");
    const auto it = std::find(first.begin(), first.end(), column);
    if (it == first.end()) throw ParseError("column not found: " + column);
    col = static_cast<std::size_t>(it - first.begin());
  }

  std::vector<double> values;
  values.reserve(lines.size());
  for (std::size_t r = has_header ? 1 : 0; r < lines.size(); ++r) {
    const std::size_t line_no = r + 1;
    if (trim_cell(lines[r]).empty()) parse_fail(line_no, "blank row");
    const std::vector<std::string> cells = split_row(lines[r], delim);
    if (col >= cells.size()) parse_fail(line_no, "row has too few columns");
    double v;
    if (!parse_number(cells[col], &v)) parse_fail(line_no, "cannot parse '" + cells[col] + "' as a number");
    values.push_back(v);
  }
  if (values.empty()) parse_fail(lines.size(), "no data rows");
  return values;
}

}  // namespace mfdp
