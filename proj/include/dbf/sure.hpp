#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "dbf/filters.hpp"
#include "dbf/format.hpp"
#include "dbf/image.hpp"
#include "dbf/metrics.hpp"
#include "dbf/noise.hpp"
#include "dbf/parallel.hpp"
#include "dbf/tensor.hpp"

// Stein's unbiased risk estimate for the bilateral variants and the grid
// search built on it. Under y = x + n, n ~ N(0, s^2 I),
//
//   SURE = |xhat - y|^2 / N + 2 s^2 div / N - s^2,   div = sum_p d xhat_p / d y_p
//
// is an unbiased estimate of |xhat - x|^2 / N. The divergence treats the
// orientation field as fixed: it is estimated once from y and frozen.

namespace dbf {

/// Raster-order sum.
inline double total(const Plane& p) noexcept {
  double acc = 0.0;
  for (double v : p.pixels()) acc += v;
  return acc;
}

struct DivergenceResult {
  GrayImage estimate;
  double divergence;
};

inline DivergenceResult filter_with_divergence(const GrayImage& y, const FilterParams& params,
                                               const OrientationField* field = nullptr,
                                               int threads = 1) {
  FilterResult r = filter_with_sensitivity(y, params, field, threads);
  const double div = total(r.sensitivity);
  return {std::move(r.estimate), div};
}

inline double sure(const GrayImage& y, const GrayImage& estimate, double divergence,
                   double sigma) {
  require_same_shape(y, estimate, "sure");
  if (!(sigma > 0.0)) throw std::invalid_argument("sure: sigma must be > 0");
  const double n = static_cast<double>(y.size());
  const double s2 = sigma * sigma;
  return sum_squared_difference(estimate, y) / n + 2.0 * s2 * divergence / n - s2;
}

struct SweepGrid {
  std::vector<double> domain_scales;  // rho_d (sigma_d for GBF), pixels
  std::vector<double> range_scales;   // rho_r (sigma_r for GBF), intensity units

  std::size_t rows() const noexcept { return domain_scales.size(); }
  std::size_t cols() const noexcept { return range_scales.size(); }
  std::size_t cells() const noexcept { return rows() * cols(); }

  void validate() const {
    auto check = [](const std::vector<double>& v, const char* what) {
      if (v.empty()) throw std::invalid_argument(std::string("sweep grid: empty ") + what);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
          throw std::invalid_argument(std::string("sweep grid: non-positive ") + what);
        }
        if (i > 0 && !(v[i] > v[i - 1])) {
          throw std::invalid_argument(std::string("sweep grid: ") + what +
                                      " must be strictly ascending");
        }
      }
    };
    check(domain_scales, "domain scales");
    check(range_scales, "range scales");
  }
};

/// n points from lo to hi, evenly spaced in log scale (n = 1 gives {lo}).
inline std::vector<double> log_space(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("log_space: need at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_space: need 0 < lo <= hi");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * i / (n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

/// "lo:hi:n" -> log_space(lo, hi, n).
inline std::vector<double> parse_grid_axis(std::string_view text) {
  const auto bad = [&] {
    return std::invalid_argument("grid axis '" + std::string(text) + "': expected lo:hi:n");
  };
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) throw bad();
  double lo = 0.0, hi = 0.0;
  int n = 0;
  auto num = [&](std::string_view s, auto& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw bad();
  };
  num(text.substr(0, a), lo);
  num(text.substr(a + 1, b - a - 1), hi);
  num(text.substr(b + 1), n);
  return log_space(lo, hi, n);
}

/// 10 x 10 log-spaced: domain 0.5..5 px, range 0.5 sigma..5 sigma.
inline SweepGrid default_grid(double sigma) {
  return SweepGrid{log_space(0.5, 5.0, 10), log_space(0.5 * sigma, 5.0 * sigma, 10)};
}

struct GridCell {
  std::size_t domain_index;
  std::size_t range_index;
};

struct SweepOptions {
  Variant variant = Variant::dbf;
  TensorScales tensor;
  std::optional<int> window_radius;  // default: per-cell default_window_radius
  int threads = 1;
};

struct SweepReport {
  SweepGrid grid;
  std::vector<double> sure_surface;                // row-major, domain outer
  std::optional<std::vector<double>> mse_surface;  // when a clean image is given
  GridCell best{0, 0};
  double sigma = 0.0;
  bool sigma_estimated = false;
  Variant variant = Variant::dbf;
  TensorScales tensor;
  std::optional<int> window_radius;
  std::optional<std::uint64_t> seed;
  std::string prng{kPrngName};

  double sure_at(std::size_t i, std::size_t j) const { return sure_surface.at(i * grid.cols() + j); }
  double mse_at(std::size_t i, std::size_t j) const { return mse_surface.value().at(i * grid.cols() + j); }
  double best_domain() const { return grid.domain_scales.at(best.domain_index); }
  double best_range() const { return grid.range_scales.at(best.range_index); }

  FilterParams params_at(std::size_t i, std::size_t j) const {
    const double d = grid.domain_scales.at(i);
    FilterParams p = FilterParams::with_default_window(variant, d, grid.range_scales.at(j));
    if (window_radius) p.window_radius = *window_radius;
    return p;
  }
  FilterParams best_params() const { return params_at(best.domain_index, best.range_index); }
};

/// Minimum over the listed cells. Ties go to the smaller domain scale, then
/// the smaller range scale, so the result does not depend on `order`.
inline GridCell select_minimum(const std::vector<double>& surface, const SweepGrid& grid,
                               const std::vector<GridCell>& order) {
  if (order.empty()) throw std::invalid_argument("select_minimum: no cells");
  auto key = [&](const GridCell& c) {
    return std::tuple(surface.at(c.domain_index * grid.cols() + c.range_index),
                      grid.domain_scales.at(c.domain_index), grid.range_scales.at(c.range_index));
  };
  GridCell best = order.front();
  for (const GridCell& c : order) {
    if (key(c) < key(best)) best = c;
  }
  return best;
}

inline std::vector<GridCell> row_major_cells(const SweepGrid& grid) {
  std::vector<GridCell> cells;
  cells.reserve(grid.cells());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) cells.push_back({i, j});
  }
  return cells;
}

namespace detail {

// All range scales of one domain row share the domain weights and window
// samples, so they are evaluated together. Per-cell arithmetic is the same
// as filter_with_sensitivity, so the results match it bit for bit.
inline std::vector<FilterResult> filter_domain_row(const GrayImage& y, FilterParams params,
                                                   const std::vector<double>& range_scales,
                                                   const OrientationField* field, int threads) {
  check_filter_inputs(y, params, field);
  const bool range = uses_range_kernel(params.variant);
  const std::size_t cells = range ? range_scales.size() : 1;
  std::vector<Plane> est(cells, Plane(y.width(), y.height()));
  std::vector<Plane> sens(cells, Plane(y.width(), y.height()));

  const WindowIndex window(y.width(), y.height(), params.window_radius);
  const DomainWeights domain(params, field);
  parallel_for(y.height(), threads, [&](int m) {
    PixelWindow pw(window.taps());
    for (int n = 0; n < y.width(); ++n) {
      pw.load(window, domain, y, m, n, range);
      for (std::size_t j = 0; j < cells; ++j) {
        const PixelResult r =
            range ? accumulate_range(pw, range_scales[j]) : accumulate_domain_only(pw);
        est[j](m, n) = r.value;
        sens[j](m, n) = r.divergence;
      }
    }
  });

  std::vector<FilterResult> out;
  out.reserve(range_scales.size());
  for (std::size_t j = 0; j < range_scales.size(); ++j) {
    // The domain-only kernel ignores the range scale; every column is the same.
    const std::size_t k = range ? j : 0;
    out.push_back(FilterResult{GrayImage(est[k]), sens[k]});
  }
  return out;
}

}  // namespace detail

/// Evaluates SURE (and MSE against `clean` when given) on every grid cell.
/// The orientation field is computed once from y and shared by all cells.
inline SweepReport sweep(const GrayImage& y, double sigma, const SweepGrid& grid,
                         const SweepOptions& options, const GrayImage* clean = nullptr) {
  grid.validate();
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sweep: sigma must be > 0");
  if (clean) require_same_shape(*clean, y, "sweep clean image");

  SweepReport report;
  report.grid = grid;
  report.sigma = sigma;
  report.variant = options.variant;
  report.tensor = options.tensor;
  report.window_radius = options.window_radius;
  report.sure_surface.assign(grid.cells(), 0.0);
  if (clean) report.mse_surface.emplace(grid.cells(), 0.0);

  std::optional<OrientationField> field;
  if (uses_orientation(options.variant)) field = orientation_field(y, options.tensor);

  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const FilterParams params = report.params_at(i, 0);
    const auto row = detail::filter_domain_row(y, params, grid.range_scales,
                                               field ? &*field : nullptr, options.threads);
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const double div = total(row[j].sensitivity);
      report.sure_surface[i * grid.cols() + j] = sure(y, row[j].estimate, div, sigma);
      if (clean) (*report.mse_surface)[i * grid.cols() + j] = mse(row[j].estimate, *clean);
    }
  }
  report.best = select_minimum(report.sure_surface, grid, row_major_cells(grid));
  return report;
}

/// Argmin of the MSE surface (requires a clean image in the sweep).
inline GridCell mse_minimum(const SweepReport& r) {
  return select_minimum(r.mse_surface.value(), r.grid, row_major_cells(r.grid));
}

struct AutoDenoiseResult {
  GrayImage estimate;
  SweepReport report;
};

/// Sweep, then filter at the SURE-optimal cell.
inline AutoDenoiseResult denoise_auto(const GrayImage& y, double sigma, const SweepGrid& grid,
                                      const SweepOptions& options,
                                      const GrayImage* clean = nullptr) {
  SweepReport report = sweep(y, sigma, grid, options, clean);
  std::optional<OrientationField> field;
  if (uses_orientation(options.variant)) field = orientation_field(y, options.tensor);
  GrayImage est = apply_filter(y, report.best_params(), field ? &*field : nullptr, options.threads);
  return {std::move(est), std::move(report)};
}

/// Surface CSV: header rho_d,rho_r,sure[,mse]; one row per cell, domain
/// scale outer.
inline void write_sweep_csv(std::ostream& os, const SweepReport& r) {
  os << "rho_d,rho_r,sure" << (r.mse_surface ? ",mse" : "") << '\n';
  for (std::size_t i = 0; i < r.grid.rows(); ++i) {
    for (std::size_t j = 0; j < r.grid.cols(); ++j) {
      os << format_real(r.grid.domain_scales[i]) << ',' << format_real(r.grid.range_scales[j])
         << ',' << format_real(r.sure_at(i, j));
      if (r.mse_surface) os << ',' << format_real(r.mse_at(i, j));
      os << '\n';
    }
  }
}

}  // namespace dbf
