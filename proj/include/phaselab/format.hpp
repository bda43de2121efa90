#pragma once

#include <charconv>
#include <string>

namespace phaselab {

/// Shortest round-trip decimal text for a double; locale independent.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace phaselab
