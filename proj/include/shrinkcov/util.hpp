#pragma once

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace shrinkcov {

/// Format with 17 significant digits, enough to round-trip any double.
inline std::string to_full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Round to the nearest integer, ties to even.
inline long long round_half_even(double v) {
  const int prev = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(v);
  std::fesetround(prev);
  return static_cast<long long>(r);
}

}  // namespace shrinkcov
