#pragma once

/// Small CSV helpers shared by the raw-data, sample and estimate files. No
/// quoting support: every field in these formats is numeric or a bare name.

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nanoflow::csv {

/// Fixed-point, 6 decimals, "-0.000000" normalised to "0.000000".
std::string fixed6(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated table whose header must equal `expected`.
/// Throws ExternalDataError on a wrong header or ragged row.
Table read_table(std::istream& in, std::initializer_list<std::string_view> expected);

/// Throw ExternalDataError naming the 1-based line on malformed input.
double parse_double(const std::string& field, std::size_t line);
std::int64_t parse_int(const std::string& field, std::size_t line);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace nanoflow::csv
