#pragma once

// Number formatting shared by every text file the library writes.

#include <charconv>
#include <string>
#include <string_view>

#include "flowsteer/error.hpp"

namespace flowsteer::detail {

/// 17 significant digits: enough for an exact round trip of any double.
inline void append_double(std::string& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

inline double parse_double(std::string_view text, std::string_view context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(std::string(context) + ": cannot parse number '" + std::string(text) + "'");
  return v;
}

}  // namespace flowsteer::detail
