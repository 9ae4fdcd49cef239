#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

namespace cbmadv {

// Shortest text form that round-trips a double exactly.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(trim(line.substr(start)));
      break;
    }
    out.emplace_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

// Strict double parse; returns false on trailing garbage or empty input.
inline bool parse_double(std::string_view s, double& out) {
  const std::string tmp(trim(s));
  if (tmp.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

inline bool parse_int64(std::string_view s, long long& out) {
  const std::string tmp(trim(s));
  if (tmp.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(tmp.c_str(), &end, 10);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace cbmadv
