#pragma once

// Signals, Gaussian measurement ensembles and seeded test-signal generation.

#include "tvcs/error.hpp"
#include "tvcs/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace tvcs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A 1-D real signal of length N >= 2 with finite entries.
class Signal {
 public:
  explicit Signal(Vector values);

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// A d-dimensional signal with side N on every axis, stored flat in
/// row-major order: axis 0 has stride 1, axis a has stride N^a.
class MultiSignal {
 public:
  MultiSignal(Vector values, int side, int dims);

  const Vector& values() const { return values_; }
  int side() const { return side_; }
  int dims() const { return dims_; }
  Eigen::Index size() const { return values_.size(); }

 private:
  Vector values_;
  int side_;
  int dims_;
};

/// Shape of the unknown: `dims` axes of length `side` (dims == 1 is a 1-D
/// signal).
struct GridShape {
  int side = 0;
  int dims = 1;

  Eigen::Index total() const;
  static GridShape line(int n) { return {n, 1}; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct MeasurementEnsemble {
  Matrix matrix;
  std::uint64_t seed = 0;

  Eigen::Index m_rows() const { return matrix.rows(); }
  Eigen::Index n_cols() const { return matrix.cols(); }

  /// Wrap an explicit matrix (zero rows allowed: the null space is then
  /// all of R^N).
  static MeasurementEnsemble from_matrix(Matrix a, std::uint64_t seed = 0);
};

/// Orthonormal basis of null(A), N x (N - M).
struct NullBasis {
  Matrix basis;
  std::uint64_t source_seed = 0;

  Eigen::Index dim() const { return basis.cols(); }
};

MeasurementEnsemble gaussian_matrix(int m, int n, const SeedSpec& seed);

/// Trailing columns of a full orthogonal decomposition of A^T. Throws
/// DegenerateEnsemble when A is rank deficient.
NullBasis null_space_basis(const MeasurementEnsemble& a);

/// Smallest of the min(M, N) singular values (0 for an empty matrix).
double min_singular_value(const MeasurementEnsemble& a);

/// Piecewise-constant signal whose difference has exactly k nonzeros.
Signal sparse_gradient_signal(int n, int k, const SeedSpec& seed, double amp_low = -10.0,
                              double amp_high = 10.0);

/// d-dimensional analogue: a sum of random axis-aligned boxes, redrawn until
/// the anisotropic gradient has exactly k nonzeros. Throws InvalidArgument if
/// no draw reaches k (e.g. k = 1 on a 2-D grid).
MultiSignal sparse_gradient_image(int side, int dims, int k, const SeedSpec& seed,
                                  double amp_low = -10.0, double amp_high = 10.0);

/// Runs fn(i) for i in [0, count) on up to `workers` threads (0 means the
/// hardware concurrency). Exceptions from fn are rethrown on the caller.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace tvcs
