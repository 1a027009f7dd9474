#ifndef CROSSDIFF_CSV_HPP
#define CROSSDIFF_CSV_HPP

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace crossdiff::csv {

/// Shortest decimal text that round-trips to the same double; "inf",
/// "-inf" and "nan" for the non-finite values.
inline std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline void write_row(std::ostream& os, std::initializer_list<std::string_view> cells) {
  bool first = true;
  for (auto cell : cells) {
    if (!first) os << ',';
    os << cell;
    first = false;
  }
  os << '\n';
}

inline void write_row(std::ostream& os, std::initializer_list<double> cells) {
  bool first = true;
  for (double cell : cells) {
    if (!first) os << ',';
    os << format(cell);
    first = false;
  }
  os << '\n';
}

}  // namespace crossdiff::csv

#endif  // CROSSDIFF_CSV_HPP
