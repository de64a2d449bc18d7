#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dbf/noise.hpp"
#include "dbf/sure.hpp"
#include "dbf/synthetic.hpp"
#include "oracles.hpp"

namespace {

using dbf::FilterParams;
using dbf::Variant;

class Divergence : public ::testing::TestWithParam<Variant> {};

TEST_P(Divergence, MatchesFiniteDifferences) {
  const Variant v = GetParam();
  const dbf::GrayImage y(oracle::random_plane(9, 8, 3));
  const auto field = dbf::orientation_field(y);
  const FilterParams p{v, 1.4, 35.0, 3};
  const double analytic = dbf::filter_with_divergence(y, p, &field).divergence;
  const double numeric = oracle::fd_divergence(y.plane(), [&](const dbf::Plane& in) {
    return dbf::apply_filter(dbf::GrayImage(in), p, &field).plane();
  });
  EXPECT_LT(std::abs(analytic - numeric) / std::abs(numeric), 1e-5)
      << analytic << " vs " << numeric;
}

INSTANTIATE_TEST_SUITE_P(AllVariants, Divergence,
                         ::testing::Values(Variant::gbf, Variant::adf, Variant::dbf));

TEST(Divergence, AdfTraceOfDenseOperator) {
  const int w = 6, h = 6;
  const dbf::GrayImage y(oracle::random_plane(w, h, 4));
  const auto field = dbf::orientation_field(y);
  const FilterParams p{Variant::adf, 1.3, 1.0, 4};
  const auto A = oracle::materialize(w, h, [&](const dbf::Plane& in) {
    return dbf::apply_filter(dbf::GrayImage(in), p, &field).plane();
  });
  double trace = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) trace += A[i][i];
  EXPECT_NEAR(dbf::filter_with_divergence(y, p, &field).divergence, trace, 1e-12);
}

TEST(Sure, IdentityWindow) {
  const dbf::GrayImage y(oracle::random_plane(10, 7, 5));
  const auto field = dbf::orientation_field(y);
  for (Variant v : {Variant::gbf, Variant::adf, Variant::dbf}) {
    const auto r = dbf::filter_with_divergence(y, {v, 1.0, 10.0, 0}, &field);
    EXPECT_EQ(r.divergence, 70.0);
    EXPECT_EQ(r.estimate, y);
    EXPECT_DOUBLE_EQ(dbf::sure(y, r.estimate, r.divergence, 12.0), 144.0);
  }
}

TEST(Sure, ZeroEstimator) {
  const dbf::GrayImage y(3, 1, std::vector<double>{1, 2, 3});
  const dbf::GrayImage zero(3, 1, 0.0);
  EXPECT_DOUBLE_EQ(dbf::sure(y, zero, 0.0, 2.0), 14.0 / 3.0 - 4.0);
  EXPECT_THROW(dbf::sure(y, zero, 0.0, 0.0), std::invalid_argument);
}

TEST(Sure, UnbiasedForKnownLinearFilter) {
  // Fixed Gaussian blur: SURE is unbiased for MSE; average over many draws.
  dbf::SyntheticImageSpec s;
  s.width = s.height = 32;
  const auto clean = dbf::generate(s);
  const FilterParams p{Variant::gbf, 1.0, 1e9, 3};
  double bias = 0.0;
  const int draws = 200;
  for (int k = 0; k < draws; ++k) {
    const auto y = dbf::add_awgn(clean, {20.0, static_cast<std::uint64_t>(1000 + k)});
    const auto r = dbf::filter_with_divergence(y, p);
    bias += dbf::sure(y, r.estimate, r.divergence, 20.0) - dbf::mse(r.estimate, clean);
  }
  bias /= draws;
  // per-draw std of SURE - MSE is about 2 sigma^2 / sqrt(N) ~ 25
  EXPECT_LT(std::abs(bias), 6.0);
}

TEST(Sure, IntensityShiftInvariance) {
  const dbf::GrayImage y(oracle::random_plane(20, 20, 6));
  dbf::GrayImage shifted = y;
  for (double& v : shifted.pixels()) v += 55.0;
  const dbf::SweepGrid grid{{0.8, 1.6}, {10.0, 40.0}};
  for (Variant v : {Variant::gbf, Variant::adf, Variant::dbf}) {
    const auto a = dbf::sweep(y, 15.0, grid, {v, {}, std::nullopt, 1});
    const auto b = dbf::sweep(shifted, 15.0, grid, {v, {}, std::nullopt, 1});
    for (std::size_t i = 0; i < a.sure_surface.size(); ++i) {
      EXPECT_NEAR(a.sure_surface[i], b.sure_surface[i], 1e-9);
    }
  }
}

TEST(Sweep, MatchesDirectEvaluationPerCell) {
  const dbf::GrayImage clean(oracle::random_plane(16, 12, 7));
  const auto y = dbf::add_awgn(clean, {10.0, 8});
  const dbf::SweepGrid grid{{0.7, 1.5, 2.5}, {5.0, 20.0}};
  for (Variant v : {Variant::gbf, Variant::adf, Variant::dbf}) {
    const auto r = dbf::sweep(y, 10.0, grid, {v, {}, std::nullopt, 1}, &clean);
    ASSERT_EQ(r.sure_surface.size(), 6u);
    ASSERT_TRUE(r.mse_surface);
    const auto field = dbf::orientation_field(y);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const FilterParams p = r.params_at(i, j);
        EXPECT_EQ(p.window_radius, dbf::default_window_radius(v, grid.domain_scales[i]));
        const auto d = dbf::filter_with_divergence(y, p, &field);
        EXPECT_EQ(r.sure_at(i, j), dbf::sure(y, d.estimate, d.divergence, 10.0));
        EXPECT_EQ(r.mse_at(i, j), dbf::mse(d.estimate, clean));
      }
    }
    const auto best = std::min_element(r.sure_surface.begin(), r.sure_surface.end());
    EXPECT_EQ(r.sure_at(r.best.domain_index, r.best.range_index), *best);
  }
}

TEST(Sweep, FixedWindowOverride) {
  const dbf::GrayImage y(oracle::random_plane(8, 8, 9));
  const auto r = dbf::sweep(y, 10.0, {{1.0, 3.0}, {10.0}}, {Variant::gbf, {}, 2, 1});
  EXPECT_EQ(r.params_at(1, 0).window_radius, 2);
}

TEST(Sweep, SingleCellGrid) {
  const dbf::GrayImage y(oracle::random_plane(8, 8, 10));
  const auto r = dbf::sweep(y, 10.0, {{1.0}, {10.0}}, {Variant::dbf, {}, std::nullopt, 1});
  EXPECT_EQ(r.best.domain_index, 0u);
  EXPECT_EQ(r.best.range_index, 0u);
}

TEST(Sweep, ArgminIgnoresEvaluationOrder) {
  const dbf::SweepGrid grid{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0}};
  std::vector<double> surface = {5, 4, 3, 9, 1, 8, 1, 7, 6, 2, 1, 3};
  auto cells = dbf::row_major_cells(grid);
  std::mt19937 rng(1);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(cells.begin(), cells.end(), rng);
    const auto best = dbf::select_minimum(surface, grid, cells);
    EXPECT_EQ(best.domain_index, 1u);
    EXPECT_EQ(best.range_index, 0u);
  }
}

TEST(Sweep, RejectsBadGrids) {
  const dbf::GrayImage y(4, 4, 1.0);
  const dbf::SweepOptions o{Variant::gbf, {}, std::nullopt, 1};
  EXPECT_THROW(dbf::sweep(y, 1.0, {{}, {1.0}}, o), std::invalid_argument);
  EXPECT_THROW(dbf::sweep(y, 1.0, {{2.0, 1.0}, {1.0}}, o), std::invalid_argument);
  EXPECT_THROW(dbf::sweep(y, 1.0, {{1.0}, {0.0}}, o), std::invalid_argument);
  EXPECT_THROW(dbf::sweep(y, 0.0, {{1.0}, {1.0}}, o), std::invalid_argument);
}

TEST(Sweep, SelectedCellIsNearMseOptimum) {
  dbf::SyntheticImageSpec s;
  s.width = s.height = 64;
  s.period = 24.0;
  const auto clean = dbf::generate(s);
  const auto y = dbf::add_awgn(clean, {20.0, 12});
  const auto r = dbf::sweep(y, 20.0, dbf::default_grid(20.0), {Variant::gbf, {}, std::nullopt, 1}, &clean);
  const auto m = dbf::mse_minimum(r);
  const auto di = static_cast<long>(r.best.domain_index) - static_cast<long>(m.domain_index);
  const auto ri = static_cast<long>(r.best.range_index) - static_cast<long>(m.range_index);
  EXPECT_LE(std::max(std::labs(di), std::labs(ri)), 2);
  // the chosen cell costs little MSE relative to the best one
  EXPECT_LT(r.mse_at(r.best.domain_index, r.best.range_index) / r.mse_at(m.domain_index, m.range_index), 1.1);
}

TEST(DenoiseAuto, ConstantImageBeatsIdentity) {
  const dbf::GrayImage clean(32, 32, 120.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto y = dbf::add_awgn(clean, {20.0, seed});
    const auto field = dbf::orientation_field(y);
    for (Variant v : {Variant::gbf, Variant::adf, Variant::dbf}) {
      const auto r = dbf::denoise_auto(y, 20.0, dbf::default_grid(20.0), {v, {}, std::nullopt, 1});
      EXPECT_LT(dbf::mse(r.estimate, clean), dbf::mse(y, clean));
      EXPECT_EQ(r.estimate, dbf::apply_filter(y, r.report.best_params(), &field));
    }
  }
}

TEST(Grid, LogSpaceAndParsing) {
  const auto v = dbf::log_space(0.5, 5.0, 10);
  ASSERT_EQ(v.size(), 10u);
  EXPECT_EQ(v.front(), 0.5);
  EXPECT_EQ(v.back(), 5.0);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], std::pow(10.0, 1.0 / 9), 1e-12);
  EXPECT_EQ(dbf::parse_grid_axis("1:4:3"), dbf::log_space(1.0, 4.0, 3));
  EXPECT_EQ(dbf::parse_grid_axis("2:2:1"), std::vector<double>{2.0});
  for (const char* bad : {"", "1:2", "1:2:3:4", "a:2:3", "1:2:0", "3:2:2", "1:2:2.5"}) {
    EXPECT_THROW(dbf::parse_grid_axis(bad), std::invalid_argument) << bad;
  }
  const auto g = dbf::default_grid(20.0);
  EXPECT_EQ(g.range_scales.front(), 10.0);
  EXPECT_EQ(g.range_scales.back(), 100.0);
}

TEST(Grid, CsvLayout) {
  const dbf::GrayImage y(oracle::random_plane(8, 8, 13));
  const auto r = dbf::sweep(y, 10.0, {{1.0, 2.0}, {5.0, 10.0}}, {Variant::gbf, {}, std::nullopt, 1}, &y);
  std::ostringstream os;
  dbf::write_sweep_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rho_d,rho_r,sure,mse");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1,5,", 0), 0u);
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

}  // namespace
