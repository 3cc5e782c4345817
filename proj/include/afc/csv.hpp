#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace afc::csv {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void put(std::ostream& os, double v) { os << num(v); }
inline void put(std::ostream& os, const std::string& s) { os << s; }
inline void put(std::ostream& os, const char* s) { os << s; }

template <class T, class... Rest>
void row(std::ostream& os, const T& first, const Rest&... rest) {
  put(os, first);
  ((os << ',', put(os, rest)), ...);
  os << '\n';
}

}  // namespace afc::csv
