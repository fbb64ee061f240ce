#include "tvcs/haar.hpp"
#include "tvcs/widths.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace tvcs;

namespace {

// E||g||_2 for g ~ N(0, I_n): sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
double chi_mean(int n) {
  return std::sqrt(2.0) * std::exp(std::lgamma((n + 1) / 2.0) - std::lgamma(n / 2.0));
}

}  // namespace

TEST(SupportValue, InactiveConstraintIsNorm) {
  const Vector g = (Vector(2) << 3, 4).finished();
  const auto v = relaxed_support_value(g, GridShape::line(2), 100.0);
  EXPECT_TRUE(v.converged);
  EXPECT_DOUBLE_EQ(v.value, 5.0);
}

TEST(SupportValue, BracketsAndFeasibility) {
  for (int t = 0; t < 20; ++t) {
    const Vector g = Rng(SeedSpec{10, std::uint64_t(t)}).gaussian_vector(64);
    const auto v = relaxed_support_value(g, GridShape::line(64), relaxed_tv_radius(2, 1));
    ASSERT_TRUE(v.converged);
    EXPECT_LE(v.value, v.upper + 1e-12);
    EXPECT_LE(v.upper - v.value, 1e-4 * v.upper + 1e-12);
    EXPECT_LE(v.value, g.norm() + 1e-12);
  }
}

TEST(SupportValue, ZeroRadiusKeepsOnlyConstants) {
  // With ||Dx||_1 <= 0 the feasible set is {c 1 : |c| sqrt(n) <= 1}.
  const Vector g = Rng(SeedSpec{11}).gaussian_vector(16);
  const auto v = relaxed_support_value(g, GridShape::line(16), 0.0);
  ASSERT_TRUE(v.converged);
  EXPECT_NEAR(v.value, std::abs(g.sum()) / 4.0, 1e-3);
}

TEST(WidthMc, InactiveConstraintMatchesChiMean) {
  // sup ||Dx||_1 over the unit ball of R^16 is below 2 sqrt(15) < 4 sqrt(4).
  const auto est = width_mc(16, 4, 1, 400, SeedSpec{20});
  EXPECT_NEAR(est.mean, chi_mean(16), 3 * est.std_error);
  EXPECT_EQ(est.rejected, 0);
  EXPECT_DOUBLE_EQ(est.per_sample_solver_tol, 1e-4);
}

TEST(WidthMc, BelowClosedFormBounds) {
  const auto est = width_mc(256, 4, 1, 30, SeedSpec{21});
  EXPECT_LE(est.mean, width_upper_bound_1d(256, 4));
  EXPECT_LE(est.mean, width_level_sum_1d(256, 4));
  const auto img = width_mc(16, 2, 2, 40, SeedSpec{22});
  EXPECT_LE(img.mean, width_upper_bound_nd(16, 2, 2));
}

TEST(WidthMc, WorkerIndependent) {
  const auto a = width_mc(32, 2, 1, 12, SeedSpec{23}, {}, 1);
  const auto b = width_mc(32, 2, 1, 12, SeedSpec{23}, {}, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(WidthMc, UnstableEstimatorThrows) {
  SolverConfig cfg;
  cfg.max_iters = 5;
  EXPECT_THROW(width_mc(64, 2, 1, 10, SeedSpec{24}, cfg), EstimatorUnstable);
  EXPECT_THROW(width_mc(64, 2, 1, 1, SeedSpec{24}), InvalidArgument);
}

TEST(ClosedForms, UpperBound1d) {
  const double expected = (4 * std::sqrt(2.0) + 4) * std::pow(1024.0, 0.25) * std::sqrt(1 + 2 * std::log(256.0));
  EXPECT_NEAR(width_upper_bound_1d(256, 4), expected, 1e-12);
  EXPECT_NEAR(width_upper_bound_1d(256, 4), 189.94, 0.01);
  EXPECT_NEAR(width_upper_bound_1d(256, 16) / width_upper_bound_1d(256, 4), std::sqrt(2.0), 1e-12);
  EXPECT_LT(width_upper_bound_1d(256, 4), width_upper_bound_1d(512, 4));
  EXPECT_LT(width_upper_bound_1d(256, 4), width_upper_bound_1d(256, 5));
  EXPECT_THROW(width_upper_bound_1d(256, 1), OutOfRegime);
  EXPECT_THROW(width_upper_bound_1d(1, 4), OutOfRegime);
}

TEST(ClosedForms, LevelSumNeverExceedsUpperBound) {
  for (int l = 2; l <= 14; ++l)
    for (int k : {2, 3, 4, 8, 16, 64}) {
      const int n = 1 << l;
      EXPECT_LE(width_level_sum_1d(n, k), width_upper_bound_1d(n, k)) << n << " " << k;
    }
  EXPECT_NEAR(level_linf_bound(256, 8), 16.0, 1e-12);
  EXPECT_NEAR(level_linf_bound(256, 1), std::sqrt(2.0) * std::sqrt(1 + 2 * std::log(128.0)), 1e-12);
}

TEST(ClosedForms, LevelLinfBoundsGaussianMaxima) {
  for (int l = 1; l <= 6; ++l) {
    double mean = 0.0;
    for (int t = 0; t < 200; ++t) {
      const Vector g = Rng(SeedSpec{30, std::uint64_t(t)}).gaussian_vector(256);
      mean += haar_level_pairing(g, l).lpNorm<Eigen::Infinity>() / 200.0;
    }
    EXPECT_LE(mean, level_linf_bound(256, l));
  }
}

TEST(ClosedForms, LowerBoundAndMeasurements) {
  EXPECT_NEAR(width_lower_bound_1d(256, 4), std::sqrt(std::numbers::pi) / 4 * std::pow(1024.0, 0.25), 1e-12);
  EXPECT_NEAR(width_lower_bound_1d(256, 4), 2.507, 5e-4);
  EXPECT_NEAR(width_lower_bound_1d(512, 8) / width_lower_bound_1d(256, 4), std::pow(4.0, 0.25), 1e-12);
  for (int n : {8, 64, 1024})
    for (int k : {2, 4, 7}) EXPECT_LE(width_lower_bound_1d(n, k), width_upper_bound_1d(n, k));

  const auto m = measurement_lower_bound(1024, 16, 0.05);
  EXPECT_NEAR(m.raw, std::numbers::pi / 16 * 128 - 4 * std::sqrt(std::log(80.0)) * 32, 1e-9);
  EXPECT_TRUE(m.vacuous);
  EXPECT_EQ(m.value, 0.0);
  EXPECT_GT(measurement_lower_bound(1024, 16, 0.5).raw, m.raw);
  EXPECT_NEAR(std::numbers::pi / 16 * std::sqrt(1024.0 * 16), 25.13, 5e-3);
  EXPECT_FALSE(measurement_lower_bound(1 << 20, 1 << 16, 0.5).vacuous);
  EXPECT_THROW(measurement_lower_bound(64, 4, 1.0), InvalidArgument);
}

TEST(ClosedForms, UpperBoundNd) {
  const double lead = 8 * std::sqrt(2.0) * 3 * 2 * std::sqrt(1 + 2 * std::log(4096.0));
  EXPECT_NEAR(width_upper_bound_nd(64, 4, 2), lead * 6 + std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(width_upper_bound_nd(64, 4, 2), 1712.1, 0.1);
  EXPECT_NEAR((width_upper_bound_nd(64, 16, 2) - std::sqrt(3.0)) / (width_upper_bound_nd(64, 4, 2) - std::sqrt(3.0)),
              2.0, 1e-12);
  const double q = std::pow(2.0, -0.5);
  EXPECT_NEAR(width_upper_bound_nd(16, 4, 3),
              8 * std::sqrt(3.0) * 7 * 2 * std::sqrt(1 + 2 * std::log(4096.0)) * q / (1 - q) + std::sqrt(3.0), 1e-9);
  EXPECT_THROW(width_upper_bound_nd(48, 4, 2), UnsupportedLength);
  EXPECT_THROW(width_upper_bound_nd(64, 4, 1), InvalidArgument);
}

TEST(ClosedForms, RequiredMeasurements) {
  EXPECT_NEAR(required_measurements(256, 4, 1), std::pow(width_upper_bound_1d(256, 4), 2), 1e-9);
  EXPECT_NEAR(required_measurements(256, 4, 1), 36078, 10);
  EXPECT_GT(required_measurements(256, 4, 1), 256);
  const double ratio = required_measurements(1024, 4, 1) / required_measurements(256, 4, 1);
  EXPECT_NEAR(ratio, 2.0 * (1 + 2 * std::log(1024.0)) / (1 + 2 * std::log(256.0)), 1e-9);
  // d = 3 depends on n only through the logarithm.
  const double a = std::sqrt(required_measurements(64, 4, 3)) - std::sqrt(3.0);
  const double b = std::sqrt(required_measurements(16, 4, 3)) - std::sqrt(3.0);
  EXPECT_NEAR(a / b, std::sqrt((1 + 6 * std::log(64.0)) / (1 + 6 * std::log(16.0))), 1e-12);
}

TEST(LowerBoundConstruction, Parameters) {
  const Vector g = Rng(SeedSpec{40}).gaussian_vector(64);
  const auto c = lower_bound_construction(g, 64, 4);
  EXPECT_NEAR(c.mu, 0.35355, 1e-5);
  EXPECT_NEAR(c.nu, 0.08839, 1e-5);
  EXPECT_NEAR(c.l_block, 32.0 / 7.0, 1e-12);
  EXPECT_EQ(c.l_int, 5);
  EXPECT_EQ(c.h_blocks, (64 - 5) / 5);
  EXPECT_NEAR(c.nu * c.nu * 64 + c.mu * c.mu * 4, 1.0, 1e-15);
  EXPECT_TRUE(c.l2_constraint());
  EXPECT_TRUE(c.l1_constraint());
  EXPECT_TRUE(c.witness_in_set());
  EXPECT_EQ(c.support.size(), 4u);
  EXPECT_NEAR(c.inner_product, c.witness.values().dot(g), 1e-12);
}

TEST(LowerBoundConstruction, AlwaysFeasible) {
  for (int t = 0; t < 300; ++t) {
    Rng rng(SeedSpec{41, std::uint64_t(t)});
    const int n = 12 + static_cast<int>(rng.index(500));
    const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n / 3 - 1)));
    const auto c = lower_bound_construction(rng.gaussian_vector(n), n, k);
    EXPECT_TRUE(c.l2_constraint());
    EXPECT_TRUE(c.l1_constraint());
    EXPECT_TRUE(c.witness_in_set()) << n << " " << k;
    EXPECT_GE(c.inner_product, 0.0);
  }
}

TEST(LowerBoundConstruction, Regime) {
  EXPECT_THROW(lower_bound_construction(Vector::Zero(30), 30, 10), OutOfRegime);
  EXPECT_THROW(lower_bound_construction(Vector::Zero(30), 30, 0), OutOfRegime);
  EXPECT_THROW(lower_bound_construction(Vector::Zero(29), 30, 2), InvalidArgument);
}

TEST(LowerBoundMc, MatchesAnalyticExpectation) {
  // E<x, g> = nu H sqrt(2 l / pi) + mu sqrt(2 k / pi).
  const int n = 1024, k = 16;
  const auto c = lower_bound_construction(Vector::Zero(n), n, k);
  const double expected =
      c.nu * c.h_blocks * std::sqrt(2.0 * c.l_int / std::numbers::pi) + c.mu * std::sqrt(2.0 * k / std::numbers::pi);
  const auto est = lower_bound_mc(n, k, 400, SeedSpec{50});
  EXPECT_NEAR(est.mean, expected, 4 * est.std_error);
}
