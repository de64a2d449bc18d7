#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>

namespace dbf {

/// exp(x) for x <= 0, branch-free so that loops over it vectorize. Results
/// are within 1 ulp of std::exp; arguments below -708 are clamped there
/// (exp(-708) ~ 3.3e-308).
///
/// Every step is either exact or a single correctly rounded operation
/// (std::fma included), so the result is the same on any IEEE-754 target.
/// Build with FMA enabled (-mfma) or the fma calls go through libm.
inline double exp_nonpositive(double x) noexcept {
  constexpr double log2e = 1.4426950408889634;
  constexpr double ln2_hi = 6.93147180369123816490e-01;  // trailing zeros: k * ln2_hi is exact
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 0x1.8p52;

  const double xc = std::max(x, -708.0);
  const double t = std::fma(xc, log2e, shifter);
  const double k = t - shifter;  // round(x / ln 2)
  const double r = std::fma(-k, ln2_lo, std::fma(-k, ln2_hi, xc));

  // Taylor series of e^r, |r| <= ln2 / 2, Horner form.
  double p = 1.0 / 6227020800.0;
  p = std::fma(p, r, 1.0 / 479001600.0);
  p = std::fma(p, r, 1.0 / 39916800.0);
  p = std::fma(p, r, 1.0 / 3628800.0);
  p = std::fma(p, r, 1.0 / 362880.0);
  p = std::fma(p, r, 1.0 / 40320.0);
  p = std::fma(p, r, 1.0 / 5040.0);
  p = std::fma(p, r, 1.0 / 720.0);
  p = std::fma(p, r, 1.0 / 120.0);
  p = std::fma(p, r, 1.0 / 24.0);
  p = std::fma(p, r, 1.0 / 6.0);
  p = std::fma(p, r, 0.5);
  p = std::fma(p, r, 1.0);
  p = std::fma(p, r, 1.0);

  // The low bits of t hold k; move k + 1023 into the exponent field.
  const std::uint64_t bits = (std::bit_cast<std::uint64_t>(t) + 1023u) << 52;
  return p * std::bit_cast<double>(bits);
}

/// out[i] = exp(arg[i]) for arg[i] <= 0.
inline void exp_nonpositive(std::span<const double> arg, std::span<double> out) noexcept {
  const std::size_t count = out.size();
  for (std::size_t i = 0; i < count; ++i) out[i] = exp_nonpositive(arg[i]);
}

}  // namespace dbf
