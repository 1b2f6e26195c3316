#include "sensnet/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace sensnet {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto res = std::from_chars(first, last, value);
  const char* tail = res.ptr;
  while (tail != last && (*tail == ' ' || *tail == '\t')) ++tail;
  if (res.ec != std::errc() || tail != last) {
    throw std::runtime_error("parse_double: not a number: '" + s + "'");
  }
  return value;
}

void CsvWriter::comment(const std::string& key, const std::string& value) {
  os_ << "# " << key << " = " << value << "\n";
}

void CsvWriter::comment(const std::string& key, double value) {
  comment(key, format_double(value));
}

void CsvWriter::header(const std::vector<std::string>& names) {
  row(names);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << fields[i];
  }
  os_ << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

CsvDocument read_csv(std::istream& is) {
  CsvDocument doc;
  std::string line;
  bool saw_header = false;
  while (std::getline(is, line)) {
    line = strip(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = strip(line.substr(1));
      std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        doc.comments[strip(body.substr(0, eq))] = strip(body.substr(eq + 1));
      }
      continue;
    }
    auto fields = split_csv_line(line);
    if (!saw_header) {
      doc.header = fields;
      saw_header = true;
    } else {
      if (fields.size() != doc.header.size()) {
        throw std::runtime_error("read_csv: row width differs from header");
      }
      doc.rows.push_back(std::move(fields));
    }
  }
  if (!saw_header) throw std::runtime_error("read_csv: no header row");
  return doc;
}

CsvDocument read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_csv_file: cannot open " + path);
  return read_csv(is);
}

}  // namespace sensnet
