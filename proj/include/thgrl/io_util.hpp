#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace thgrl::io {

// Shortest decimal form that round-trips an IEEE double, so artifacts reload
// to the exact values that were written.
inline std::string format_double(double x) {
  for (int prec : {6, 9, 12, 15}) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, x);
    if (std::strtod(probe, nullptr) == x) return probe;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] inline void fail_at(const std::filesystem::path& file, std::size_t lineno,
                                 const std::string& what) {
  throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + what);
}

// Reads a text file line by line, skipping blank and '#'-prefixed comment
// lines, and calls fn(line, lineno). Strips a trailing '\r' if present.
template <class Fn>
void for_each_data_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(std::string_view(line), lineno);
  }
}

// Visits only '#'-prefixed lines, with the marker and any following spaces
// removed. Lets loaders read back the settings a writer recorded up front.
template <class Fn>
void for_each_comment_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] != '#') continue;
    std::size_t body = 1;
    while (body < line.size() && line[body] == ' ') ++body;
    fn(std::string_view(line).substr(body), lineno);
  }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline double parse_double(std::string_view tok, const std::filesystem::path& file,
                           std::size_t lineno) {
  char* end = nullptr;
  std::string buf(tok);
  double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0') fail_at(file, lineno, "bad number '" + buf + "'");
  return v;
}

inline long parse_long(std::string_view tok, const std::filesystem::path& file,
                       std::size_t lineno) {
  char* end = nullptr;
  std::string buf(tok);
  long v = std::strtol(buf.c_str(), &end, 10);
  if (end == buf.c_str() || *end != '\0') fail_at(file, lineno, "bad integer '" + buf + "'");
  return v;
}

}  // namespace thgrl::io
