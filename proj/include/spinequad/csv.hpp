#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spinequad/errors.hpp"

// Minimal CSV helpers shared by the loggers and analyzers. Values never
// contain commas or quotes in this repo's formats, so no quoting layer.
namespace spinequad::csv {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Shortest representation that round-trips exactly.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
      throw FormatError(context + ": trailing characters in number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw FormatError(context + ": expected a number, got '" + s + "'");
  } catch (const std::out_of_range&) {
    throw FormatError(context + ": number out of range '" + s + "'");
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open for reading: " + path);
  return in;
}

}  // namespace spinequad::csv
