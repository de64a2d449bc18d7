#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dbf/format.hpp"
#include "dbf/image.hpp"

namespace dbf {

inline double sum_squared_difference(const Plane& a, const Plane& b) {
  require_same_shape(a, b, "sum_squared_difference");
  double acc = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc;
}

/// (1/N) * sum (a_p - b_p)^2
inline double mse(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b, "mse");
  return sum_squared_difference(a, b) / static_cast<double>(a.size());
}

inline double psnr_from_mse(double mse_value, double peak = 255.0) {
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

/// 10 log10(peak^2 / mse) in dB; +inf for identical images.
inline double psnr(const GrayImage& a, const GrayImage& b, double peak = 255.0) {
  return psnr_from_mse(mse(a, b), peak);
}

/// Noise standard deviation that gives the requested input PSNR.
inline double sigma_for_psnr(double psnr_db, double peak = 255.0) {
  return peak * std::pow(10.0, -psnr_db / 20.0);
}

/// Robust noise estimate: median absolute deviation of the diagonal
/// finest-scale Haar detail over non-overlapping 2x2 blocks, scaled by
/// 1/0.6745.
inline double estimate_noise_sigma(const GrayImage& img) {
  std::vector<double> detail;
  detail.reserve(img.size() / 4 + 1);
  for (int m = 0; m + 1 < img.height(); m += 2) {
    for (int n = 0; n + 1 < img.width(); n += 2) {
      const double d =
          (img(m, n) - img(m, n + 1) - img(m + 1, n) + img(m + 1, n + 1)) / 2.0;
      detail.push_back(std::abs(d));
    }
  }
  if (detail.empty()) {
    throw std::invalid_argument("estimate_noise_sigma: image smaller than 2x2");
  }
  const auto mid = detail.begin() + static_cast<std::ptrdiff_t>(detail.size() / 2);
  std::nth_element(detail.begin(), mid, detail.end());
  return *mid / 0.6745;
}

}  // namespace dbf
