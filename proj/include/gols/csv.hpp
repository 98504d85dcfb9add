#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace gols::detail {

// Shortest round-trip decimal form; locale-independent, so repeated runs
// produce byte-identical files.
inline void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    out += "nan";
    return;
  }
  out.append(buf, ptr);
}

inline void append_long(std::string& out, long v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace gols::detail
