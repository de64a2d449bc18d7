#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/image.hpp"

namespace dbf {

enum class SyntheticKind { oriented_fringe, concentric_rings, step_wedge };

inline std::string_view to_string(SyntheticKind k) noexcept {
  switch (k) {
    case SyntheticKind::oriented_fringe: return "oriented-fringe";
    case SyntheticKind::concentric_rings: return "concentric-rings";
    case SyntheticKind::step_wedge: return "step-wedge";
  }
  return "?";
}

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "oriented-fringe" || s == "fringe") return SyntheticKind::oriented_fringe;
  if (s == "concentric-rings" || s == "rings") return SyntheticKind::concentric_rings;
  if (s == "step-wedge" || s == "wedge") return SyntheticKind::step_wedge;
  throw std::invalid_argument("unknown synthetic image kind '" + std::string(s) + "'");
}

struct SyntheticImageSpec {
  SyntheticKind kind = SyntheticKind::oriented_fringe;
  int width = 256;
  int height = 256;
  double angle_deg = 30.0;  // direction along which intensity varies (fringe, wedge)
  double period = 32.0;     // pixels per cycle (fringe, rings) or per step (wedge)
  double amplitude = 100.0;
  double offset = 128.0;
  int steps = 8;  // wedge levels

  void validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("synthetic: size must be positive");
    if (!(period >= 4.0)) throw std::invalid_argument("synthetic: period must be >= 4 px");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("synthetic: amplitude must be >= 0");
    if (offset - amplitude < 0.0 || offset + amplitude > 255.0) {
      throw std::invalid_argument("synthetic: offset +/- amplitude must stay within [0, 255]");
    }
    if (kind == SyntheticKind::step_wedge && steps < 2) {
      throw std::invalid_argument("synthetic: wedge needs at least 2 steps");
    }
  }
};

/// Deterministic test pattern. The fringe is
/// offset + amplitude * sin(2 pi (n cos a + m sin a) / period).
inline GrayImage generate(const SyntheticImageSpec& spec) {
  spec.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double a = spec.angle_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a);
  const double sa = std::sin(a);
  const double cm = (spec.height - 1) / 2.0;
  const double cn = (spec.width - 1) / 2.0;

  std::vector<double> px(static_cast<std::size_t>(spec.width) * spec.height);
  for (int m = 0; m < spec.height; ++m) {
    for (int n = 0; n < spec.width; ++n) {
      double v = spec.offset;
      switch (spec.kind) {
        case SyntheticKind::oriented_fringe:
          v += spec.amplitude * std::sin(two_pi * (n * ca + m * sa) / spec.period);
          break;
        case SyntheticKind::concentric_rings:
          v += spec.amplitude * std::sin(two_pi * std::hypot(m - cm, n - cn) / spec.period);
          break;
        case SyntheticKind::step_wedge: {
          const long k = static_cast<long>(std::floor((n * ca + m * sa) / spec.period));
          const long level = ((k % spec.steps) + spec.steps) % spec.steps;
          v += spec.amplitude * (2.0 * level / (spec.steps - 1) - 1.0);
          break;
        }
      }
      px[static_cast<std::size_t>(m) * spec.width + n] = v;
    }
  }
  return GrayImage(spec.width, spec.height, std::move(px));
}

}  // namespace dbf
