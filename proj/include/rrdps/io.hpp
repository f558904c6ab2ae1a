#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <variant>
#include <vector>

namespace rrdps::io {

// Absent values render as the literal "--" in CSV and null in JSON.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double value, int significant_digits);

// Comma-separated, '.' decimal point, header row, LF line endings.
std::string to_csv(const Table&, int significant_digits);

// Array of flat objects mirroring the CSV rows; numbers at full precision.
std::string to_json(const Table&);

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
ParsedCsv read_csv(std::istream&);

}  // namespace rrdps::io
