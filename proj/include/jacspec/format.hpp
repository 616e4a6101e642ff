#pragma once

#include <cstdio>
#include <string>

namespace jacspec {

/// Shortest-safe round-trip text form used in every CSV artifact.
inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace jacspec
