#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "termspace/cli.hpp"

namespace termspace::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, const std::string& source, long row) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw InvalidArgument(source + ": row " + std::to_string(row) + ": cannot parse '" + std::string(field) + "'");
  return v;
}

}  // namespace

Matrix read_points_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = body.find(',', start);
      row.push_back(parse_field(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start),
                                source, lineno));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument(source + ": row " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                            " columns, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument(source + ": no points");
  Matrix out(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  return out;
}

Matrix read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return read_points_csv(in, path);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Matrix& columns, const std::vector<int>& flags) {
  if (!flags.empty() && static_cast<Index>(flags.size()) != columns.cols())
    throw InvalidArgument("write_csv: flag count mismatch");
  std::string line;
  for (Index j = 0; j < columns.cols(); ++j) {
    line.clear();
    for (Index i = 0; i < columns.rows(); ++i) {
      if (i) line += ',';
      line += format_double(columns(i, j));
    }
    if (!flags.empty()) line += ',' + std::to_string(flags[static_cast<std::size_t>(j)]);
    line += '\n';
    out << line;
  }
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("cannot write " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw InvalidArgument("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw InvalidArgument("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace termspace::cli
