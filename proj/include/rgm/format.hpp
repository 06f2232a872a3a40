#pragma once

#include <cstdio>
#include <string>

namespace rgm {

// Reals in CSV/JSON outputs: 17 significant digits, so they round-trip.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace rgm
