#pragma once

#include <cstdio>
#include <string>

#include "rkmor/types.hpp"

namespace rkmor {

/// Shortest representation that round-trips a double exactly.
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string g17(Complex z) {
  return "(" + g17(z.real()) + "," + g17(z.imag()) + ")";
}

}  // namespace rkmor
