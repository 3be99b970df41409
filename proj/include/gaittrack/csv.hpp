#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaittrack/errors.hpp"

namespace gait::csv {

// Deterministic shortest-round-trip formatting; identical bytes for identical values.
inline std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format(long long v) { return std::to_string(v); }

inline double parse_double(std::string_view field, std::size_t line_no, const std::string& path) {
  double out = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(ErrorCode::malformed_row, path + ":" + std::to_string(line_no) + ": bad numeric field '" +
                                       std::string(field) + "'");
  return out;
}

inline long long parse_int(std::string_view field, std::size_t line_no, const std::string& path) {
  long long out = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(ErrorCode::malformed_row, path + ":" + std::to_string(line_no) + ": bad integer field '" +
                                       std::string(field) + "'");
  return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

struct Row {
  std::size_t line_no = 0;  // 1-based line number in the file
  std::string text;
};

struct File {
  std::vector<std::string> comments;  // leading '#' lines, stripped of newline
  std::string header;
  std::vector<Row> rows;
};

// Loads a CSV with optional leading comment lines, a header, and data rows.
// Blank lines are ignored. CRLF is tolerated.
inline File load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  File f;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!have_header) f.comments.push_back(line);
      continue;
    }
    if (!have_header) {
      f.header = line;
      have_header = true;
      continue;
    }
    f.rows.push_back(Row{line_no, line});
  }
  if (!have_header) fail(ErrorCode::empty_stream, path + ": no header row");
  return f;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << contents;
  if (!out) fail(ErrorCode::io_error, "write failed for " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gait::csv
