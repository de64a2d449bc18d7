#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dbf/convolve.hpp"
#include "dbf/format.hpp"
#include "dbf/image.hpp"

// Local orientation analysis: derivative-of-Gaussian gradients, the smoothed
// structure tensor J = G_rho * (grad I)(grad I)^T, its eigenvalues, and the
// steering parameters (theta, gamma1, gamma2) for the oriented domain kernel.
//
// Angles live in the (x, y) = (n, m) frame: x runs along columns, y along
// rows (downwards). theta is the direction of the kernel's long axis, i.e.
// the edge direction, perpendicular to the dominant gradient.

namespace dbf {

struct Gradient {
  Plane gx;  // d/dx, along columns
  Plane gy;  // d/dy, along rows
};

struct TensorField {
  Plane j11;  // <gx gx>
  Plane j12;  // <gx gy>
  Plane j22;  // <gy gy>

  int width() const noexcept { return j11.width(); }
  int height() const noexcept { return j11.height(); }
};

struct Eigenvalues {
  double lambda1;  // larger
  double lambda2;
};

struct Scalings {
  double gamma1;  // along the edge, <= 1
  double gamma2;  // across the edge, >= 1
};

enum class ThetaFormula {
  eigen,  // pi/2 + atan2(2 j12, j11 - j22) / 2
  ratio,  // pi/2 + atan(2 j12 / (j22 - j11)), no half angle; for comparison only
};

struct OrientationField {
  Plane theta;
  Plane gamma1;
  Plane gamma2;
  Plane coherence;

  int width() const noexcept { return theta.width(); }
  int height() const noexcept { return theta.height(); }
};

struct TensorScales {
  double sigma_g = 1.0;  // gradient scale
  double rho = 2.0;      // tensor smoothing scale
  // Absolute flat-region threshold on lambda1 + lambda2. When unset,
  // 1e-6 times the image mean of lambda1 + lambda2.
  std::optional<double> eps_flat;
  ThetaFormula theta_formula = ThetaFormula::eigen;
};

inline constexpr double kRelativeFlatThreshold = 1e-6;

inline Gradient gradient_dog(const Plane& img, double sigma_g) {
  if (!(sigma_g > 0.0) || !std::isfinite(sigma_g)) {
    throw std::invalid_argument("gradient_dog: sigma_g must be > 0");
  }
  const HalfKernel deriv = gaussian_derivative_kernel(sigma_g);
  const HalfKernel smooth = gaussian_kernel(sigma_g);
  // Derivative pass first in both directions keeps transpose symmetry exact.
  return Gradient{filter_cols(filter_rows(img, deriv), smooth),
                  filter_rows(filter_cols(img, deriv), smooth)};
}

inline TensorField structure_tensor(const Gradient& g, double rho) {
  require_same_shape(g.gx, g.gy, "structure_tensor");
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("structure_tensor: rho must be >= 0");
  }
  const int w = g.gx.width();
  const int h = g.gx.height();
  Plane xx(w, h), xy(w, h), yy(w, h);
  const auto gx = g.gx.pixels();
  const auto gy = g.gy.pixels();
  for (std::size_t i = 0; i < gx.size(); ++i) {
    xx.pixels()[i] = gx[i] * gx[i];
    xy.pixels()[i] = gx[i] * gy[i];
    yy.pixels()[i] = gy[i] * gy[i];
  }
  return TensorField{gaussian_smooth(xx, rho), gaussian_smooth(xy, rho),
                     gaussian_smooth(yy, rho)};
}

inline Eigenvalues eigenvalues(double j11, double j12, double j22) noexcept {
  const double root = std::sqrt((j22 - j11) * (j22 - j11) + 4.0 * j12 * j12);
  return {0.5 * (j22 + j11 + root), 0.5 * (j22 + j11 - root)};
}

/// Wraps an angle into [0, pi).
inline double normalize_angle(double theta) noexcept {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, pi);
  if (t < 0.0) t += pi;
  return t >= pi ? 0.0 : t;
}

inline double orientation(double j11, double j12, double j22,
                          ThetaFormula formula = ThetaFormula::eigen) noexcept {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (formula == ThetaFormula::ratio) {
    const double ratio = (2.0 * j12) / (j22 - j11);
    return normalize_angle(half_pi + (std::isnan(ratio) ? 0.0 : std::atan(ratio)));
  }
  return normalize_angle(half_pi + 0.5 * std::atan2(2.0 * j12, j11 - j22));
}

/// (lambda1 - lambda2) / (lambda1 + lambda2), or 0 where the trace is at or
/// below eps_flat.
inline double coherence(double lambda1, double lambda2, double eps_flat = 0.0) noexcept {
  const double trace = lambda1 + lambda2;
  if (!(trace > eps_flat) || trace <= 0.0) return 0.0;
  return std::clamp((lambda1 - lambda2) / trace, 0.0, 1.0);
}

inline Scalings scalings(double c) noexcept {
  const double gamma2 = 1.0 + c;
  return {1.0 / gamma2, gamma2};
}

inline double default_flat_threshold(const TensorField& t) {
  double total = 0.0;
  const auto a = t.j11.pixels();
  const auto b = t.j22.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] + b[i];
  return kRelativeFlatThreshold * total / static_cast<double>(a.size());
}

inline OrientationField orientation_from_tensor(const TensorField& t,
                                                std::optional<double> eps_flat,
                                                ThetaFormula formula) {
  const double eps = eps_flat.value_or(default_flat_threshold(t));
  if (!(eps >= 0.0)) throw std::invalid_argument("orientation_field: eps_flat must be >= 0");
  const int w = t.width();
  const int h = t.height();
  OrientationField f{Plane(w, h), Plane(w, h, 1.0), Plane(w, h, 1.0), Plane(w, h)};
  for (std::size_t i = 0; i < t.j11.size(); ++i) {
    const double j11 = t.j11.pixels()[i];
    const double j12 = t.j12.pixels()[i];
    const double j22 = t.j22.pixels()[i];
    const Eigenvalues ev = eigenvalues(j11, j12, j22);
    const bool flat = !(ev.lambda1 + ev.lambda2 > eps);
    const double c = flat ? 0.0 : coherence(ev.lambda1, ev.lambda2, eps);
    const Scalings s = scalings(c);
    f.theta.pixels()[i] = flat ? 0.0 : orientation(j11, j12, j22, formula);
    f.gamma1.pixels()[i] = s.gamma1;
    f.gamma2.pixels()[i] = s.gamma2;
    f.coherence.pixels()[i] = c;
  }
  return f;
}

inline OrientationField orientation_field(const GrayImage& img,
                                          const TensorScales& scales = {}) {
  const TensorField t = structure_tensor(gradient_dog(img, scales.sigma_g), scales.rho);
  return orientation_from_tensor(t, scales.eps_flat, scales.theta_formula);
}

/// Isotropic field (theta = 0, gamma1 = gamma2 = 1) of the given size.
inline OrientationField isotropic_field(int width, int height) {
  return OrientationField{Plane(width, height), Plane(width, height, 1.0),
                          Plane(width, height, 1.0), Plane(width, height)};
}

// --- debug dumps ---

/// theta scaled [0, pi) -> [0, 255].
inline GrayImage theta_map(const OrientationField& f) {
  Plane out(f.width(), f.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = f.theta.pixels()[i] / std::numbers::pi * 255.0;
  }
  return GrayImage(std::move(out));
}

/// C scaled [0, 1] -> [0, 255].
inline GrayImage coherence_map(const OrientationField& f) {
  Plane out(f.width(), f.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = f.coherence.pixels()[i] * 255.0;
  }
  return GrayImage(std::move(out));
}

/// CSV with header m,n,j11,j12,j22, one row per pixel in raster order.
inline void write_tensor_csv(std::ostream& os, const TensorField& t) {
  os << "m,n,j11,j12,j22\n";
  for (int m = 0; m < t.height(); ++m) {
    for (int n = 0; n < t.width(); ++n) {
      os << m << ',' << n << ',' << format_real(t.j11(m, n)) << ','
         << format_real(t.j12(m, n)) << ',' << format_real(t.j22(m, n)) << '\n';
    }
  }
}

}  // namespace dbf
