#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/convolve.hpp"
#include "dbf/fast_exp.hpp"
#include "dbf/image.hpp"
#include "dbf/parallel.hpp"
#include "dbf/tensor.hpp"

// Normalized windowed averaging
//
//   xhat_p = sum_q phi(p, q) y_q / sum_q phi(p, q),   q in the (2R+1)^2 window
//
// with three weightings:
//   GBF  phi = exp(-|p-q|^2 / 2 sd^2) exp(-(y_p - y_q)^2 / 2 sr^2)
//   ADF  phi = exp(-(g1^2 u^2 + g2^2 v^2) / 2 rd^2)
//   DBF  phi = ADF domain weight times the GBF range weight (scale rr)
// where (u, v) is the offset q - p rotated by the per-pixel angle theta.

namespace dbf {

enum class Variant { gbf, adf, dbf };

enum class Boundary { mirror };

inline std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::gbf: return "gbf";
    case Variant::adf: return "adf";
    case Variant::dbf: return "dbf";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "gbf" || s == "GBF") return Variant::gbf;
  if (s == "adf" || s == "ADF") return Variant::adf;
  if (s == "dbf" || s == "DBF") return Variant::dbf;
  throw std::invalid_argument("unknown filter variant '" + std::string(s) +
                              "' (expected gbf, adf or dbf)");
}

constexpr bool uses_orientation(Variant v) noexcept { return v != Variant::gbf; }
constexpr bool uses_range_kernel(Variant v) noexcept { return v != Variant::adf; }

inline constexpr int kMaxDefaultWindowRadius = 15;

/// ceil(3 * scale) for GBF; ceil(3 * scale * 2) for the oriented kernels
/// because gamma1 >= 0.5 stretches the long axis by up to 2. Capped at 15.
inline int default_window_radius(Variant v, double domain_scale) {
  const double stretch = uses_orientation(v) ? 2.0 : 1.0;
  const int r = static_cast<int>(std::ceil(3.0 * domain_scale * stretch));
  return std::clamp(r, 1, kMaxDefaultWindowRadius);
}

struct FilterParams {
  Variant variant = Variant::dbf;
  double domain_scale = 1.0;  // sigma_d (GBF) or rho_d (ADF, DBF), pixels
  double range_scale = 1.0;   // sigma_r or rho_r, intensity units; ignored by ADF
  int window_radius = 1;      // 0 degenerates to the single-sample window
  Boundary boundary = Boundary::mirror;

  static FilterParams with_default_window(Variant v, double domain, double range) {
    return FilterParams{v, domain, range, default_window_radius(v, domain)};
  }

  void validate() const {
    if (!(domain_scale > 0.0) || !std::isfinite(domain_scale)) {
      throw std::invalid_argument("filter: domain scale must be > 0");
    }
    if (uses_range_kernel(variant) &&
        (!(range_scale > 0.0) || !std::isfinite(range_scale))) {
      throw std::invalid_argument("filter: range scale must be > 0");
    }
    if (window_radius < 0) throw std::invalid_argument("filter: negative window radius");
  }
};

namespace detail {

// -(g1^2 u^2 + g2^2 v^2) / (2 rho^2) with u = dx c + dy s, v = -dx s + dy c.
// Equal scalings skip the rotation; the value is then exactly the isotropic
// exponent, so unit scalings reproduce the Gaussian kernel bit for bit.
inline double oriented_exponent(int dx, int dy, double c, double s, double gamma1,
                                double gamma2, double rho_d) noexcept {
  if (gamma1 == gamma2) {
    return -(gamma1 * gamma1 * double(dx * dx + dy * dy)) / (2.0 * rho_d * rho_d);
  }
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  return -(gamma1 * gamma1 * u * u + gamma2 * gamma2 * v * v) / (2.0 * rho_d * rho_d);
}

}  // namespace detail

/// One entry of a domain stencil.
struct KernelSample {
  int dx;
  int dy;
  double weight;
};

// Every kernel exponential goes through exp_nonpositive so that the scalar
// functions below and the batched engine agree bit for bit.

inline double domain_exponent_gaussian(int dx, int dy, double sigma_d) noexcept {
  return -double(dx * dx + dy * dy) / (2.0 * sigma_d * sigma_d);
}

inline double domain_weight_gaussian(int dx, int dy, double sigma_d) noexcept {
  return exp_nonpositive(domain_exponent_gaussian(dx, dy, sigma_d));
}

/// Oriented Gaussian. (dx, dy) is the offset q - p along columns and rows;
/// u = dx cos(theta) + dy sin(theta) runs along the long axis.
inline double domain_weight_oriented(int dx, int dy, double theta, double gamma1,
                                     double gamma2, double rho_d) noexcept {
  return exp_nonpositive(
      detail::oriented_exponent(dx, dy, std::cos(theta), std::sin(theta), gamma1, gamma2, rho_d));
}

inline double range_weight(double yp, double yq, double sigma_r) noexcept {
  const double d = yp - yq;
  return exp_nonpositive(d * d * (-1.0 / (2.0 * sigma_r * sigma_r)));
}

/// Oriented stencil for inspection, rows of dy outer, dx inner.
inline std::vector<KernelSample> oriented_stencil(double theta, double gamma1,
                                                  double gamma2, double rho_d,
                                                  int radius) {
  std::vector<KernelSample> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      out.push_back({dx, dy, domain_weight_oriented(dx, dy, theta, gamma1, gamma2, rho_d)});
    }
  }
  return out;
}

namespace detail {

// Mirrored sample indices of every window position, precomputed per image.
class WindowIndex {
 public:
  WindowIndex(int width, int height, int radius)
      : radius_(radius), span_(2 * radius + 1),
        rows_(static_cast<std::size_t>(height) * span_),
        cols_(static_cast<std::size_t>(width) * span_) {
    for (int m = 0; m < height; ++m) {
      for (int k = -radius; k <= radius; ++k) rows_[m * span_ + k + radius] = reflect101(m + k, height);
    }
    for (int n = 0; n < width; ++n) {
      for (int k = -radius; k <= radius; ++k) cols_[n * span_ + k + radius] = reflect101(n + k, width);
    }
  }

  int radius() const noexcept { return radius_; }
  std::size_t taps() const noexcept { return static_cast<std::size_t>(span_) * span_; }

  /// Window samples of pixel (m, n) in tap order, and the summed domain
  /// weight of taps that land on (m, n) itself.
  double gather(const Plane& y, int m, int n, std::span<const double> weights,
                std::span<double> values) const noexcept {
    double self = 0.0;
    std::size_t t = 0;
    for (int a = 0; a < span_; ++a) {
      const int qm = rows_[m * span_ + a];
      const auto row = y.row(qm);
      for (int b = 0; b < span_; ++b, ++t) {
        const int qn = cols_[n * span_ + b];
        values[t] = row[qn];
        if (qm == m && qn == n) self += weights[t];
      }
    }
    return self;
  }

 private:
  int radius_;
  int span_;
  std::vector<int> rows_;
  std::vector<int> cols_;
};

inline std::vector<double> gaussian_domain_table(int radius, double sigma_d) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) w.push_back(domain_weight_gaussian(dx, dy, sigma_d));
  }
  return w;
}

inline void oriented_domain_weights(const OrientationField& f, int m, int n, int radius,
                                    double rho_d, std::span<double> out) noexcept {
  const double theta = f.theta(m, n);
  const double g1 = f.gamma1(m, n);
  const double g2 = f.gamma2(m, n);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::size_t t = 0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      out[t++] = oriented_exponent(dx, dy, c, s, g1, g2, rho_d);
    }
  }
  exp_nonpositive(out, out);
}

/// Supplies per-pixel domain weights for a given variant.
class DomainWeights {
 public:
  DomainWeights(const FilterParams& p, const OrientationField* field)
      : params_(p), field_(field) {
    if (!uses_orientation(p.variant)) {
      table_ = gaussian_domain_table(p.window_radius, p.domain_scale);
    }
  }

  /// Returns a view of the weights for pixel (m, n); `scratch` is used when
  /// they vary per pixel.
  std::span<const double> at(int m, int n, std::span<double> scratch) const noexcept {
    if (!table_.empty()) return table_;
    oriented_domain_weights(*field_, m, n, params_.window_radius, params_.domain_scale, scratch);
    return scratch;
  }

 private:
  FilterParams params_;
  const OrientationField* field_;
  std::vector<double> table_;
};

struct PixelResult {
  double value;
  double divergence;  // d xhat_p / d y_p with domain weights held fixed
};

// Window of one pixel: domain weights, samples and the range-independent
// terms shared by every range scale.
struct PixelWindow {
  explicit PixelWindow(std::size_t taps) : scratch(taps), values(taps), diff(taps), diff2(taps) {}

  void load(const WindowIndex& window, const DomainWeights& domain, const Plane& y,
            int m, int n, bool with_range);

  std::vector<double> scratch;
  std::span<const double> weights;
  std::vector<double> values;
  std::vector<double> diff;   // y_q - y_p
  std::vector<double> diff2;  // (y_q - y_p)^2
  double center = 0.0;
  double self = 0.0;
};

inline void PixelWindow::load(const WindowIndex& window, const DomainWeights& domain,
                              const Plane& y, int m, int n, bool with_range) {
  weights = domain.at(m, n, scratch);
  self = window.gather(y, m, n, weights, values);
  center = y(m, n);
  for (std::size_t t = 0; t < values.size(); ++t) diff[t] = values[t] - center;
  if (!with_range) return;
  for (std::size_t t = 0; t < values.size(); ++t) diff2[t] = diff[t] * diff[t];
}

// The estimate is y_p + sum phi (y_q - y_p) / h, so a flat window returns y_p
// exactly. With phi' = phi (y_q - y_p) / r^2,
//   d xhat_p / d y_p = (self + sum phi' (y_q - xhat_p)) / h
//                    = (self + (sum phi d^2 - (sum phi d)^2 / h) / r^2) / h
// where `self` collects taps that alias p itself (mirroring can map a
// non-zero offset back onto p); their range weight is identically 1.
inline PixelResult accumulate_range(const PixelWindow& pw, double range_scale) noexcept {
  const double a = -1.0 / (2.0 * range_scale * range_scale);
  // Four interleaved partial sums per quantity, combined in a fixed order.
  double h4[4] = {}, m4[4] = {}, q4[4] = {};
  const std::size_t taps = pw.values.size();
  const double* w = pw.weights.data();
  const double* d = pw.diff.data();
  const double* d2 = pw.diff2.data();
  auto add = [&](std::size_t t, std::size_t k) {
    const double phi = w[t] * exp_nonpositive(d2[t] * a);
    h4[k] += phi;
    m4[k] = std::fma(phi, d[t], m4[k]);
    q4[k] = std::fma(phi, d2[t], q4[k]);
  };
  std::size_t t = 0;
  for (; t + 4 <= taps; t += 4) {
    for (std::size_t k = 0; k < 4; ++k) add(t + k, k);
  }
  for (std::size_t k = 0; t < taps; ++t, ++k) add(t, k);
  const double h = (h4[0] + h4[1]) + (h4[2] + h4[3]);
  const double m1 = (m4[0] + m4[1]) + (m4[2] + m4[3]);
  const double q = (q4[0] + q4[1]) + (q4[2] + q4[3]);
  const double mean_shift = m1 / h;
  const double spread = std::max(0.0, q - m1 * mean_shift);
  return {pw.center + mean_shift, (pw.self + spread / (range_scale * range_scale)) / h};
}

inline PixelResult accumulate_domain_only(const PixelWindow& pw) noexcept {
  double h4[4] = {}, m4[4] = {};
  const std::size_t taps = pw.values.size();
  std::size_t t = 0;
  for (; t + 4 <= taps; t += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      h4[k] += pw.weights[t + k];
      m4[k] = std::fma(pw.weights[t + k], pw.diff[t + k], m4[k]);
    }
  }
  for (std::size_t k = 0; t < taps; ++t, ++k) {
    h4[k] += pw.weights[t];
    m4[k] = std::fma(pw.weights[t], pw.diff[t], m4[k]);
  }
  const double h = (h4[0] + h4[1]) + (h4[2] + h4[3]);
  const double m1 = (m4[0] + m4[1]) + (m4[2] + m4[3]);
  return {pw.center + m1 / h, pw.self / h};
}

inline void check_filter_inputs(const GrayImage& y, const FilterParams& p,
                                const OrientationField* field) {
  p.validate();
  if (uses_orientation(p.variant)) {
    if (field == nullptr) {
      throw std::invalid_argument(std::string("filter: variant ") +
                                  std::string(to_string(p.variant)) +
                                  " requires an orientation field");
    }
    require_same_shape(field->theta, y.plane(), "filter orientation field");
  }
}

}  // namespace detail

/// Filtered image plus the per-pixel self-sensitivities d xhat_p / d y_p.
struct FilterResult {
  GrayImage estimate;
  Plane sensitivity;
};

/// Runs the filter and, in the same pass, the diagonal of its Jacobian with
/// the orientation field frozen. Rows are processed by up to `threads`
/// workers; results do not depend on the worker count.
inline FilterResult filter_with_sensitivity(const GrayImage& y, const FilterParams& params,
                                            const OrientationField* field, int threads = 1) {
  detail::check_filter_inputs(y, params, field);
  const detail::WindowIndex window(y.width(), y.height(), params.window_radius);
  const detail::DomainWeights domain(params, field);
  const bool range = uses_range_kernel(params.variant);

  Plane out(y.width(), y.height());
  Plane sens(y.width(), y.height());
  parallel_for(y.height(), threads, [&](int m) {
    detail::PixelWindow pw(window.taps());
    for (int n = 0; n < y.width(); ++n) {
      pw.load(window, domain, y, m, n, range);
      const detail::PixelResult r = range ? detail::accumulate_range(pw, params.range_scale)
                                          : detail::accumulate_domain_only(pw);
      out(m, n) = r.value;
      sens(m, n) = r.divergence;
    }
  });
  return FilterResult{GrayImage(std::move(out)), std::move(sens)};
}

inline GrayImage apply_filter(const GrayImage& y, const FilterParams& params,
                              const OrientationField* field = nullptr, int threads = 1) {
  return filter_with_sensitivity(y, params, field, threads).estimate;
}

}  // namespace dbf
