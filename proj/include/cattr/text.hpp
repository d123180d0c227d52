#pragma once

// Small string helpers shared across modules.

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace cattr {

inline std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits on '\n'; a trailing '\r' stays on the line and is removed by trim().
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Fixed-point rendering, independent of the global C++ locale.
inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (!s.empty() && s.front() == '-') s.erase(0, 1);
  }
  return s;
}

// Shortest decimal that round-trips to the same double.
inline std::string format_shortest(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Four significant digits in plain decimal notation (no exponent). Values of
// magnitude >= 1e4 are rounded to four significant digits and printed whole.
inline std::string format_sig4(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  int e = static_cast<int>(std::floor(std::log10(std::abs(v))));
  double scale = std::pow(10.0, e - 3);
  double rounded = std::round(v / scale) * scale;
  // Rounding can carry into the next decade (9.9996 -> 10.00).
  if (rounded != 0.0) e = static_cast<int>(std::floor(std::log10(std::abs(rounded)) + 1e-12));
  int decimals = std::max(0, 3 - e);
  return format_fixed(rounded, decimals);
}

}  // namespace cattr
