#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbf/image.hpp"

namespace dbf {

/// Mirror index without repeating the edge sample (reflect-101):
/// ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
/// Offsets larger than the signal reflect repeatedly.
inline int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Truncation radius shared by every Gaussian in the library.
inline int gaussian_radius(double sigma) {
  return static_cast<int>(std::ceil(3.0 * sigma));
}

/// Symmetric (even) or antisymmetric (odd) 1-D kernel stored by its
/// non-negative half: taps[k] is the weight at offset +k.
struct HalfKernel {
  std::vector<double> taps;
  bool odd = false;

  int radius() const noexcept { return static_cast<int>(taps.size()) - 1; }

  double at(int k) const noexcept {
    const double t = taps[static_cast<std::size_t>(k < 0 ? -k : k)];
    return (odd && k < 0) ? -t : t;
  }
};

/// Sampled Gaussian of std `sigma`, truncated at ceil(3 sigma) and
/// renormalized to unit sum. sigma = 0 is the identity kernel.
inline HalfKernel gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian_kernel: sigma must be >= 0");
  }
  if (sigma == 0.0) return HalfKernel{{1.0}, false};
  const int radius = gaussian_radius(sigma);
  HalfKernel k{std::vector<double>(static_cast<std::size_t>(radius) + 1), false};
  double total = 0.0;
  for (int i = 0; i <= radius; ++i) {
    k.taps[i] = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    total += (i == 0 ? 1.0 : 2.0) * k.taps[i];
  }
  for (double& t : k.taps) t /= total;
  return k;
}

/// First derivative of a Gaussian, odd, scaled so that the unit ramp
/// f(i) = i has response exactly 1 before rounding.
inline HalfKernel gaussian_derivative_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian_derivative_kernel: sigma must be > 0");
  }
  const int radius = std::max(1, gaussian_radius(sigma));
  HalfKernel k{std::vector<double>(static_cast<std::size_t>(radius) + 1), true};
  double moment = 0.0;
  for (int i = 1; i <= radius; ++i) {
    k.taps[i] = i * std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    moment += 2.0 * i * k.taps[i];
  }
  for (double& t : k.taps) t /= moment;
  return k;
}

namespace detail {

// Symmetric taps pair the mirrored samples before multiplying, odd taps take
// their difference; constants therefore map to exactly zero under odd kernels
// and reversing the signal reverses (or negates) the output exactly.
inline double apply_half_kernel(const HalfKernel& k, auto&& sample, int center,
                                int length) {
  double acc = k.odd ? 0.0 : k.taps[0] * sample(center);
  for (int i = 1; i <= k.radius(); ++i) {
    const double fwd = sample(reflect101(center + i, length));
    const double bwd = sample(reflect101(center - i, length));
    acc += k.taps[i] * (k.odd ? fwd - bwd : fwd + bwd);
  }
  return acc;
}

}  // namespace detail

/// Correlate every row with `k` (filtering along x, the column index n).
inline Plane filter_rows(const Plane& in, const HalfKernel& k) {
  Plane out(in.width(), in.height());
  for (int m = 0; m < in.height(); ++m) {
    const auto row = in.row(m);
    auto sample = [&](int n) { return row[n]; };
    for (int n = 0; n < in.width(); ++n) {
      out(m, n) = detail::apply_half_kernel(k, sample, n, in.width());
    }
  }
  return out;
}

/// Correlate every column with `k` (filtering along y, the row index m).
inline Plane filter_cols(const Plane& in, const HalfKernel& k) {
  Plane out(in.width(), in.height());
  for (int n = 0; n < in.width(); ++n) {
    auto sample = [&](int m) { return in(m, n); };
    for (int m = 0; m < in.height(); ++m) {
      out(m, n) = detail::apply_half_kernel(k, sample, m, in.height());
    }
  }
  return out;
}

/// Unit-sum Gaussian smoothing with mirrored borders; rho = 0 is a copy.
inline Plane gaussian_smooth(const Plane& in, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("gaussian_smooth: negative scale");
  if (rho == 0.0) return in;
  const HalfKernel k = gaussian_kernel(rho);
  return filter_cols(filter_rows(in, k), k);
}

}  // namespace dbf
