#include "nanoflow/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

#include "nanoflow/errors.hpp"

namespace nanoflow::csv {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

Table read_table(std::istream& in, std::initializer_list<std::string_view> expected) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ExternalDataError("missing CSV header");
  for (auto& f : split(trim(line))) t.header.emplace_back(trim(f));
  if (t.header.size() != expected.size() ||
      !std::equal(t.header.begin(), t.header.end(), expected.begin())) {
    std::string want;
    for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
    throw ExternalDataError("unexpected CSV header '" + line + "', expected '" + want + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    auto fields = split(body);
    if (fields.size() != expected.size()) {
      throw ExternalDataError("line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(expected.size()));
    }
    for (auto& f : fields) f = std::string(trim(f));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ExternalDataError("bad number '" + field + "' on line " + std::to_string(line));
  }
  return v;
}

std::int64_t parse_int(const std::string& field, std::size_t line) {
  std::int64_t v = 0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ExternalDataError("bad integer '" + field + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace nanoflow::csv
