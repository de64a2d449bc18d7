#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dbf/image.hpp"

namespace dbf {

/// Generator and sampler recorded in reports. mt19937_64 output is fixed by
/// the C++ standard; the Gaussian transform is done here instead of through
/// std::normal_distribution, whose algorithm varies between standard libraries.
inline constexpr std::string_view kPrngName = "mt19937_64+box-muller";

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic standard-normal stream.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1), both from the top 53 bits.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// y = x + n with n ~ N(0, sigma^2) i.i.d.; the result is not clamped.
inline GrayImage add_awgn(const GrayImage& img, const NoiseSpec& noise) {
  if (!(noise.sigma > 0.0) || !std::isfinite(noise.sigma)) {
    throw std::invalid_argument("add_awgn: sigma must be positive and finite");
  }
  GaussianStream gauss(noise.seed);
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (double& v : out) v += noise.sigma * gauss.next();
  return GrayImage(img.width(), img.height(), std::move(out));
}

}  // namespace dbf
