#include "tvcs/core.hpp"
#include "tvcs/operators.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>

using namespace tvcs;

TEST(SeedSpec, ChildStreamsAreDistinctAndStable) {
  const SeedSpec root{42};
  EXPECT_EQ(root.child(3), root.child(3));
  EXPECT_EQ(root.child(3).value(), root.child(3).value());
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(root.child(i).value());
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(SeedSpec{42}.value(), SeedSpec{43}.value());
}

TEST(Signal, RejectsShortOrNonFinite) {
  EXPECT_THROW(Signal(Vector::Zero(1)), InvalidArgument);
  Vector v = Vector::Zero(3);
  v[1] = std::nan("");
  EXPECT_THROW(Signal{v}, InvalidArgument);
  EXPECT_THROW(MultiSignal(Vector::Zero(5), 2, 2), InvalidArgument);
}

TEST(GaussianMatrix, Deterministic) {
  const auto a = gaussian_matrix(1, 2, SeedSpec{5});
  const auto b = gaussian_matrix(1, 2, SeedSpec{5});
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_NE(a.matrix, gaussian_matrix(1, 2, SeedSpec{6}).matrix);
}

TEST(GaussianMatrix, EntryMoments) {
  const auto a = gaussian_matrix(200, 200, SeedSpec{17});
  const double mean = a.matrix.mean();
  const double var = (a.matrix.array() - mean).square().sum() / double(a.matrix.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(GaussianMatrix, InvalidSizes) {
  EXPECT_THROW(gaussian_matrix(0, 4, SeedSpec{1}), InvalidArgument);
  EXPECT_THROW(gaussian_matrix(2, 1, SeedSpec{1}), InvalidArgument);
}

TEST(NullSpaceBasis, SquareFullRankIsEmpty) {
  const auto h = null_space_basis(MeasurementEnsemble::from_matrix(Matrix::Identity(2, 2)));
  EXPECT_EQ(h.basis.rows(), 2);
  EXPECT_EQ(h.dim(), 0);
}

TEST(NullSpaceBasis, AnalyticLine) {
  Matrix a(1, 2);
  a << 1, 1;
  const auto h = null_space_basis(MeasurementEnsemble::from_matrix(a));
  ASSERT_EQ(h.dim(), 1);
  EXPECT_NEAR(h.basis(0, 0), -h.basis(1, 0), 1e-15);
  EXPECT_NEAR(h.basis.norm(), 1.0, 1e-15);
  EXPECT_NEAR((a * h.basis).norm(), 0.0, 1e-15);
}

TEST(NullSpaceBasis, RandomResidualAndOrthonormality) {
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(SeedSpec{99, std::uint64_t(trial)});
    const int n = 2 + static_cast<int>(rng.index(127));
    const int m = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    const auto a = gaussian_matrix(m, n, SeedSpec{3, std::uint64_t(trial)});
    const auto h = null_space_basis(a);
    ASSERT_EQ(h.dim(), n - m);
    if (h.dim() == 0) continue;
    EXPECT_LE((a.matrix * h.basis).cwiseAbs().maxCoeff(), 1e-10 * a.matrix.cwiseAbs().maxCoeff());
    EXPECT_LE((h.basis.transpose() * h.basis - Matrix::Identity(h.dim(), h.dim())).cwiseAbs().maxCoeff(),
              1e-10);
  }
  const auto h = null_space_basis(gaussian_matrix(6, 10, SeedSpec{8}));
  EXPECT_EQ(h.basis.rows(), 10);
  EXPECT_EQ(h.dim(), 4);
}

TEST(NullSpaceBasis, RankDeficientThrows) {
  Matrix a(2, 4);
  a << 1, 2, 3, 4, 2, 4, 6, 8;
  EXPECT_THROW(null_space_basis(MeasurementEnsemble::from_matrix(a)), DegenerateEnsemble);
}

TEST(NullSpaceBasis, NoRowsGivesWholeSpace) {
  const auto h = null_space_basis(MeasurementEnsemble::from_matrix(Matrix(0, 4)));
  EXPECT_EQ(h.basis, Matrix::Identity(4, 4));
}

TEST(MinSingularValue, AnalyticCases) {
  EXPECT_DOUBLE_EQ(min_singular_value(MeasurementEnsemble::from_matrix(Matrix::Identity(3, 3))), 1.0);
  Matrix a = Matrix::Zero(2, 4);
  a(0, 0) = 3;
  a(1, 1) = 2;
  EXPECT_NEAR(min_singular_value(MeasurementEnsemble::from_matrix(a)), 2.0, 1e-14);
}

TEST(MinSingularValue, ConcentratesNearSqrtNMinusSqrtM) {
  double sum = 0.0;
  for (int s = 0; s < 50; ++s) sum += min_singular_value(gaussian_matrix(100, 400, SeedSpec{2024, std::uint64_t(s)}));
  const double mean = sum / 50.0;
  EXPECT_GE(mean, 8.5);
  EXPECT_LE(mean, 11.5);
}

TEST(SparseGradientSignal, ExactSparsity) {
  EXPECT_EQ(tv_norm(sparse_gradient_signal(8, 0, SeedSpec{1})), 0.0);
  EXPECT_EQ(count_nonzeros(diff_1d(sparse_gradient_signal(8, 1, SeedSpec{1}))), 1);
  for (int s = 0; s < 300; ++s) {
    const int n = 2 + s % 70;
    const int k = s % n;
    const auto x = sparse_gradient_signal(n, k, SeedSpec{77, std::uint64_t(s)});
    ASSERT_EQ(count_nonzeros(diff_1d(x), 1e-9), k) << "n=" << n << " k=" << k;
    EXPECT_LE(x.values().maxCoeff(), 10.0);
    EXPECT_GE(x.values().minCoeff(), -10.0);
  }
}

TEST(SparseGradientSignal, DeterministicAndValidated) {
  const auto a = sparse_gradient_signal(64, 3, SeedSpec{5});
  const auto b = sparse_gradient_signal(64, 3, SeedSpec{5});
  EXPECT_EQ(a.values(), b.values());
  EXPECT_THROW(sparse_gradient_signal(8, 8, SeedSpec{1}), InvalidArgument);
  EXPECT_THROW(sparse_gradient_signal(8, 2, SeedSpec{1}, 1.0, 1.0), InvalidArgument);
}

TEST(SparseGradientImage, ExactSparsity) {
  for (int k : {4, 8, 12, 20}) {
    const auto x = sparse_gradient_image(16, 2, k, SeedSpec{31, std::uint64_t(k)});
    EXPECT_EQ(count_nonzeros(diff_nd(x), 1e-9), k);
  }
  const auto c = sparse_gradient_image(8, 3, 0, SeedSpec{1});
  EXPECT_EQ(tv_norm(c), 0.0);
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw InvalidArgument("boom");
                            }),
               InvalidArgument);
}
