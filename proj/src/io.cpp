#include "rrdps/io.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace rrdps::io {

std::string format_double(double value, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

namespace {

std::string cell_to_csv(const Cell& cell, int sig) {
  if (std::holds_alternative<std::monostate>(cell)) return "--";
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d, sig);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    return std::to_string(*i);
  }
  return std::get<std::string>(cell);
}

}  // namespace

std::string to_csv(const Table& table, int significant_digits) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) os << ',';
    os << table.header[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << cell_to_csv(row[i], significant_digits);
    }
    os << '\n';
  }
  return os.str();
}

std::string to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
      const auto& key = table.header[i];
      const auto& cell = row[i];
      if (std::holds_alternative<std::monostate>(cell)) {
        obj[key] = nullptr;
      } else if (const auto* d = std::get_if<double>(&cell)) {
        obj[key] = *d;
      } else if (const auto* n = std::get_if<std::int64_t>(&cell)) {
        obj[key] = *n;
      } else {
        obj[key] = std::get<std::string>(cell);
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump() + "\n";
}

ParsedCsv read_csv(std::istream& in) {
  ParsedCsv out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      out.header = std::move(fields);
      first = false;
    } else {
      out.rows.push_back(std::move(fields));
    }
  }
  return out;
}

}  // namespace rrdps::io
