#include "tvcs/certificates.hpp"
#include "tvcs/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace tvcs;

namespace {

// Recovers every signal whose gradient is supported on exactly k positions,
// over all supports and sign patterns, with the LP oracle.
bool recovers_all_patterns(const MeasurementEnsemble& a, int k) {
  const int n = static_cast<int>(a.n_cols());
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[std::size_t(i)] = i;
  while (true) {
    for (int mask = 0; mask < (1 << k); ++mask) {
      Vector x = Vector::Zero(n);
      for (int j = 0; j < k; ++j) {
        const double jump = ((mask >> j) & 1) ? -1.0 - j : 1.0 + j;
        x.tail(n - 1 - idx[std::size_t(j)]).array() += jump;
      }
      const Signal rec = lp_oracle_tv_min(a, a.matrix * x);
      if ((rec.values() - x).norm() > 1e-6 * (1 + x.norm())) return false;
    }
    int i = k - 1;
    while (i >= 0 && idx[std::size_t(i)] == n - 1 - k + i) --i;
    if (i < 0) return true;
    ++idx[std::size_t(i)];
    for (int j = i + 1; j < k; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
  }
}

// (N-1) x N matrix whose rows are orthogonal to the constant vector.
MeasurementEnsemble constant_kernel(int n, std::uint64_t seed) {
  Matrix a = gaussian_matrix(n - 1, n, SeedSpec{seed}).matrix;
  a = a.colwise() - a.rowwise().mean();
  return MeasurementEnsemble::from_matrix(a);
}

}  // namespace

TEST(NullSpaceCondition, TrivialNullSpaceHolds) {
  for (int k = 0; k <= 3; ++k) {
    const auto r = null_space_condition(gaussian_matrix(8, 8, SeedSpec{1}), k);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.worst_ratio, 0.0);
  }
}

TEST(NullSpaceCondition, WholeSpaceFails) {
  const auto r = null_space_condition(MeasurementEnsemble::from_matrix(Matrix(0, 4)), 1);
  EXPECT_FALSE(r.holds);
  EXPECT_TRUE(std::isinf(r.worst_ratio));
}

TEST(NullSpaceCondition, ConstantInNullSpaceFails) {
  const auto r = null_space_condition(constant_kernel(8, 3), 1);
  EXPECT_FALSE(r.holds);
  EXPECT_TRUE(std::isinf(r.worst_ratio));
}

TEST(NullSpaceCondition, Guards) {
  EXPECT_THROW(null_space_condition(gaussian_matrix(5, 15, SeedSpec{1}), 1), ScaleGuard);
  EXPECT_THROW(null_space_condition(gaussian_matrix(5, 10, SeedSpec{1}), 4), ScaleGuard);
  EXPECT_THROW(balanced_condition(gaussian_matrix(5, 10, SeedSpec{1}), 1, 0.0), InvalidArgument);
}

TEST(NullSpaceCondition, MatchesExhaustiveRecoveryK1) {
  int holds = 0;
  for (int s = 0; s < 20; ++s) {
    const auto a = gaussian_matrix(6, 10, SeedSpec{300, std::uint64_t(s)});
    const auto cert = null_space_condition(a, 1);
    EXPECT_EQ(cert.holds, recovers_all_patterns(a, 1)) << "seed " << s;
    EXPECT_EQ(cert.work, 9);
    holds += cert.holds;
  }
  // The ensemble is near its threshold at this size: both verdicts occur.
  EXPECT_GT(holds, 0);
  EXPECT_LT(holds, 20);
}

TEST(NullSpaceCondition, MatchesExhaustiveRecoveryK2) {
  for (int s = 0; s < 12; ++s) {
    const int n = 8 + s % 5;
    const auto a = gaussian_matrix(n - 3, n, SeedSpec{310, std::uint64_t(s)});
    EXPECT_EQ(null_space_condition(a, 2).holds, recovers_all_patterns(a, 2)) << "seed " << s;
  }
}

TEST(NullSpaceCondition, RatioIsAttainedByWorstSupport) {
  const auto a = gaussian_matrix(6, 10, SeedSpec{300, 8});
  const auto r = null_space_condition(a, 1);
  ASSERT_EQ(r.worst_support.size(), 1u);
  // Evaluate the ratio at random null vectors: never above the LP optimum.
  const auto h = null_space_basis(a);
  for (int t = 0; t < 500; ++t) {
    const Vector z = h.basis * Rng(SeedSpec{9, std::uint64_t(t)}).gaussian_vector(h.dim());
    const GradField g = diff(z, GridShape::line(10));
    for (int i = 0; i < 9; ++i) {
      const auto part = restrict_to(g, SupportSet({i}));
      EXPECT_LE(part.on_support / part.off_support, r.worst_ratio + 1e-9);
    }
  }
}

TEST(BalancedCondition, LimitAndNesting) {
  for (int s = 0; s < 10; ++s) {
    const auto a = gaussian_matrix(7, 10, SeedSpec{320, std::uint64_t(s)});
    const auto nsc = null_space_condition(a, 2);
    EXPECT_EQ(balanced_condition(a, 2, 1.0).holds, nsc.holds);
    EXPECT_EQ(balanced_condition(a, 2, 1.0 - 1e-12).holds, nsc.holds);
    bool previous = false;
    for (double c : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      const bool h = balanced_condition(a, 2, c).holds;
      if (previous) EXPECT_TRUE(h);
      previous = h;
      if (h) EXPECT_TRUE(balanced_condition(a, 1, c).holds);
    }
  }
}

TEST(BalancedCondition, Deterministic) {
  const auto a = gaussian_matrix(7, 10, SeedSpec{77});
  const auto first = balanced_condition(a, 1, 0.5);
  const auto again = balanced_condition(a, 1, 0.5, 3);
  EXPECT_EQ(first.holds, again.holds);
  EXPECT_EQ(first.worst_ratio, again.worst_ratio);
  EXPECT_EQ(first.worst_support, again.worst_support);
}

TEST(AlmostEuclidean, ConstantNullSpaceGivesZero) {
  EXPECT_NEAR(almost_euclidean_beta(null_space_basis(constant_kernel(16, 4)), 5, SeedSpec{1}), 0.0, 1e-12);
  EXPECT_TRUE(std::isinf(almost_euclidean_beta(null_space_basis(gaussian_matrix(5, 5, SeedSpec{1})), 3, SeedSpec{1})));
}

TEST(AlmostEuclidean, MonotoneInRestartsAndPositive) {
  const auto h = null_space_basis(gaussian_matrix(32, 64, SeedSpec{400}));
  const double fifty = almost_euclidean_beta(h, 50, SeedSpec{401});
  const double hundred = almost_euclidean_beta(h, 100, SeedSpec{401});
  EXPECT_GT(fifty, 0.0);
  EXPECT_LE(hundred, fifty);
  // Upper estimate: no sampled null vector does better.
  for (int t = 0; t < 200; ++t) {
    const Vector z = h.basis * Rng(SeedSpec{402, std::uint64_t(t)}).gaussian_vector(h.dim());
    EXPECT_GE(tv_norm(z, GridShape::line(64)) / (8.0 * z.norm()), hundred - 1e-12);
  }
}

TEST(AlmostEuclidean, PositiveAcrossSeeds) {
  for (int s = 0; s < 20; ++s) {
    const auto h = null_space_basis(gaussian_matrix(32, 64, SeedSpec{410, std::uint64_t(s)}));
    // Pilot runs at this size gave estimates between 0.28 and 0.42.
    EXPECT_GT(almost_euclidean_beta(h, 20, SeedSpec{411, std::uint64_t(s)}), 0.01);
  }
}

TEST(AlmostEuclidean, RotationInvariant) {
  const auto h = null_space_basis(gaussian_matrix(20, 40, SeedSpec{420}));
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian_matrix(20, 20, SeedSpec{421}).matrix).householderQ();
  const NullBasis rotated{h.basis * q, h.source_seed};
  EXPECT_NEAR(almost_euclidean_beta(h, 5, SeedSpec{422}), almost_euclidean_beta(rotated, 5, SeedSpec{422}), 1e-9);
}

TEST(PartialTv, EdgeCasesAndGrowth) {
  const auto h = null_space_basis(gaussian_matrix(32, 64, SeedSpec{430}));
  EXPECT_EQ(partial_tv_sup(h, 0, 5, SeedSpec{1}), 0.0);
  const double full = partial_tv_sup(h, 63, 10, SeedSpec{431});
  EXPECT_LE(full, 2.0 * std::sqrt(63.0) + 1e-9);
  const double k3 = partial_tv_sup(h, 3, 20, SeedSpec{432});
  const double k6 = partial_tv_sup(h, 6, 20, SeedSpec{432});
  EXPECT_GT(k6, k3);
  EXPECT_LT(k6, 2.0 * k3);
  EXPECT_LE(k6, full + 1e-9);
  EXPECT_THROW(partial_tv_sup(h, 64, 1, SeedSpec{1}), InvalidArgument);
}

TEST(Deviation, ExponentClosedForm) {
  const double h = -0.1 * std::log(0.1) - 0.9 * std::log(0.9);
  const double expected = -(h + 0.9 * std::log(0.5 / std::sqrt(2 * std::numbers::pi)));
  EXPECT_NEAR(deviation_exponent(0.05, 10), expected, 1e-14);
  EXPECT_NEAR(deviation_exponent(0.05, 10), 1.1258, 5e-5);
  EXPECT_THROW(deviation_exponent(0.0, 10), InvalidArgument);
  EXPECT_THROW(deviation_exponent(0.1, 1), InvalidArgument);
}

TEST(Deviation, ProbabilityLimits) {
  const auto big = tv_small_prob(8, 10.0, 2000, SeedSpec{1});
  EXPECT_EQ(big.probability, 1.0);
  const auto zero = tv_small_prob(8, 0.0, 2000, SeedSpec{1});
  EXPECT_EQ(zero.hits, 0);
  EXPECT_NEAR(zero.empirical_log_prob_per_n, std::log(3.0 / 2000) / 8, 1e-15);
  EXPECT_THROW(tv_small_prob(8, 0.3, 999, SeedSpec{1}), InvalidArgument);
}

TEST(Deviation, BoundDirectionAndWorkerIndependence) {
  const auto one = tv_small_prob(6, 0.3, 100000, SeedSpec{5}, 1);
  const auto four = tv_small_prob(6, 0.3, 100000, SeedSpec{5}, 4);
  EXPECT_EQ(one.hits, four.hits);
  EXPECT_LE(one.empirical_log_prob_per_n, -one.bound_exponent + 0.5);
  EXPECT_GE(one.bound_exponent, one.loosest_exponent);
  EXPECT_GE(one.best_t, 2);
  EXPECT_LE(one.best_t, 64);
}
