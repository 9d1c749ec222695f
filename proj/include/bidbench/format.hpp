#pragma once

#include <cstdio>
#include <string>

namespace bidbench {

/// Round-trip-exact decimal rendering of a double. %.17g preserves every
/// IEEE-754 binary64 value, which is what makes emitted CSVs byte-stable.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace bidbench
