#pragma once

#include <charconv>
#include <string>

namespace matan {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

}  // namespace matan
