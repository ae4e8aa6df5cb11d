#pragma once

#include "unmixio/core.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace unmixio {

namespace detail {

inline double parse_field(std::string_view token, Index row, Index field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("row " + std::to_string(row) + ", field " +
                     std::to_string(field) + ": not a number: '" +
                     std::string(token) + "'");
  if (!std::isfinite(value))
    throw ParseError("row " + std::to_string(row) + ", field " +
                     std::to_string(field) + ": non-finite value '" +
                     std::string(token) + "'");
  return value;
}

// Splits a line on whitespace and/or commas; empty fields are skipped so
// both "1, 2, 3" and "1\t2\t3" parse identically.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  const auto is_sep = [](char c) {
    return c == ' ' || c == '\t' || c == ',' || c == '\r';
  };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace detail

// Reads a numeric matrix from text: one time sample per line, channels
// separated by whitespace or commas. Blank lines are ignored. Every data row
// must have the same number of fields.
inline TimeSeriesMatrix read_matrix(const std::filesystem::path& path,
                                    double sampling_rate = 0.0) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open for reading: " + path.string());
  std::vector<std::vector<double>> rows;
  Index width = -1;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (width < 0) width = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != width)
      throw ParseError(path.string() + ": row " + std::to_string(lineno) +
                       " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(width));
    std::vector<double> row(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f)
      row[f] = detail::parse_field(fields[f], lineno, static_cast<Index>(f + 1));
    rows.push_back(std::move(row));
  }
  if (in.bad())
    throw IoError("read failure on " + path.string());
  if (rows.empty())
    throw ParseError("no numeric rows in " + path.string());
  Matrix m(static_cast<Index>(rows.size()), width);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < width; ++c) m(r, c) = rows[r][c];
  return {std::move(m), sampling_rate};
}

inline std::string matrix_to_text(const Matrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += '\t';
      out += format_value(m(r, c));
    }
    out += '\n';
  }
  return out;
}

// Tab-separated text, one sample per line, "%.17g" per entry so that
// read_matrix(write_matrix(x)) reproduces x bit for bit.
inline void write_matrix(const TimeSeriesMatrix& m,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open for writing: " + path.string());
  out << matrix_to_text(m.data);
  out.flush();
  if (!out)
    throw IoError("write failure on " + path.string());
}

// Dense matrix as "row,col,value" CSV with 1-based indices.
inline std::string matrix_to_csv(const Matrix& m) {
  std::string out = "row,col,value\n";
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      out += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
             format_value(m(r, c)) + "\n";
  return out;
}

inline void write_text(const std::string& content,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out)
    throw IoError("write failure on " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw IoError("read failure on " + path.string());
  return buf.str();
}

}  // namespace unmixio
