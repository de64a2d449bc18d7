#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace dbf {

/// Shortest decimal text that round-trips to the same double; "inf", "-inf"
/// and "nan" for non-finite values. Output does not depend on the locale.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) return std::to_string(v);
  return std::string(buf, res.ptr);
}

/// Fixed-point text with the given number of decimals.
inline std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return format_real(v);
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  if (res.ec != std::errc{}) return std::to_string(v);
  return std::string(buf, res.ptr);
}

}  // namespace dbf
