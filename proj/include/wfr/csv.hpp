#pragma once

#include <cstdio>
#include <string>

namespace wfr::csv {

// Full double precision, locale independent.
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace wfr::csv
