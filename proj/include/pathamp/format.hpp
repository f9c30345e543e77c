#pragma once

#include <charconv>
#include <string>

namespace pathamp {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace pathamp
