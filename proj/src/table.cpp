#include "scod/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "scod/errors.hpp"

namespace scod {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw DataError(path + ":" + std::to_string(line_no) + ": bad numeric cell '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::kId: return "ID";
    case Split::kOod: return "OOD";
    case Split::kUnlabeled: return "UNLABELED";
  }
  return "?";
}

Split split_from_string(const std::string& text) {
  if (text == "ID") return Split::kId;
  if (text == "OOD") return Split::kOod;
  if (text == "UNLABELED") return Split::kUnlabeled;
  throw DataError("unknown split '" + text + "'");
}

std::size_t SampleTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool SampleTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t SampleTable::count(Split split) const {
  std::size_t n = 0;
  for (const auto& row : rows) n += row.split == split;
  return n;
}

SampleTable read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_line(line);
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "split" ||
      header[2] != "label") {
    throw DataError(path + ": header must start with sample_id,split,label");
  }
  SampleTable table;
  table.columns.assign(header.begin() + 3, header.end());
  std::set<std::string> seen(table.columns.begin(), table.columns.end());
  if (seen.size() != table.columns.size()) throw DataError(path + ": duplicate column names");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": wrong field count");
    }
    SampleTable::Row row;
    row.id = fields[0];
    row.split = split_from_string(fields[1]);
    row.label = std::stoi(fields[2]);
    if (row.split == Split::kId && row.label < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ID row needs label >= 0");
    }
    row.values.reserve(table.columns.size());
    for (std::size_t i = 3; i < fields.size(); ++i) {
      row.values.push_back(parse_cell(fields[i], path, line_no));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table_csv(const SampleTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write table: " + path);
  out << "sample_id,split,label";
  for (const auto& col : table.columns) out << ',' << col;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.id << ',' << to_string(row.split) << ',' << row.label;
    for (double v : row.values) {
      out << ',';
      if (!std::isnan(v)) out << format_value(v);
    }
    out << '\n';
  }
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace scod
