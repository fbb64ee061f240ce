#include "tvcs/core.hpp"

#include "tvcs/operators.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace tvcs {

Signal::Signal(Vector values) : values_(std::move(values)) {
  if (values_.size() < 2) throw InvalidArgument("Signal: length must be at least 2");
  if (!values_.allFinite()) throw InvalidArgument("Signal: entries must be finite");
}

MultiSignal::MultiSignal(Vector values, int side, int dims)
    : values_(std::move(values)), side_(side), dims_(dims) {
  if (dims_ < 1 || side_ < 2) throw InvalidArgument("MultiSignal: need side >= 2, dims >= 1");
  if (values_.size() != GridShape{side_, dims_}.total())
    throw InvalidArgument("MultiSignal: size is not side^dims");
  if (!values_.allFinite()) throw InvalidArgument("MultiSignal: entries must be finite");
}

Eigen::Index GridShape::total() const {
  Eigen::Index t = 1;
  for (int a = 0; a < dims; ++a) t *= side;
  return t;
}

MeasurementEnsemble MeasurementEnsemble::from_matrix(Matrix a, std::uint64_t seed) {
  if (a.cols() < 1) throw InvalidArgument("measurement matrix needs at least one column");
  return MeasurementEnsemble{std::move(a), seed};
}

MeasurementEnsemble gaussian_matrix(int m, int n, const SeedSpec& seed) {
  if (m < 1 || n < 2) throw InvalidArgument("gaussian_matrix: need m >= 1 and n >= 2");
  Rng rng(seed);
  Matrix a(m, n);
  // Row-major fill so that a prefix of rows does not depend on n.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return MeasurementEnsemble{std::move(a), seed.value()};
}

NullBasis null_space_basis(const MeasurementEnsemble& a) {
  const Eigen::Index m = a.m_rows();
  const Eigen::Index n = a.n_cols();
  if (m == 0) return NullBasis{Matrix::Identity(n, n), a.seed};
  if (m > n) throw DegenerateEnsemble("null_space_basis: more rows than columns");

  Eigen::ColPivHouseholderQR<Matrix> qr(a.matrix.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw DegenerateEnsemble("null_space_basis: A is rank deficient");
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return NullBasis{q.rightCols(n - m), a.seed};
}

double min_singular_value(const MeasurementEnsemble& a) {
  if (a.m_rows() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a.matrix);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s.minCoeff();
}

Signal sparse_gradient_signal(int n, int k, const SeedSpec& seed, double amp_low,
                              double amp_high) {
  if (n < 2) throw InvalidArgument("sparse_gradient_signal: n must be at least 2");
  if (k < 0 || k > n - 1) throw InvalidArgument("sparse_gradient_signal: need 0 <= k <= n-1");
  if (!(amp_low < amp_high)) throw InvalidArgument("sparse_gradient_signal: amp_low >= amp_high");

  Rng rng(seed);
  // Breakpoint p means x[p] != x[p-1]; choose k of {1..n-1} without
  // replacement by a partial Fisher-Yates shuffle.
  std::vector<int> positions(n - 1);
  std::iota(positions.begin(), positions.end(), 1);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1 - i)));
    std::swap(positions[i], positions[j]);
  }
  std::vector<int> breaks(positions.begin(), positions.begin() + k);
  std::sort(breaks.begin(), breaks.end());

  std::vector<double> levels;
  levels.reserve(k + 1);
  levels.push_back(rng.uniform(amp_low, amp_high));
  while (static_cast<int>(levels.size()) < k + 1) {
    const double v = rng.uniform(amp_low, amp_high);
    if (std::abs(v - levels.back()) >= 1e-9) levels.push_back(v);
  }

  Vector x(n);
  int piece = 0;
  for (int i = 0; i < n; ++i) {
    if (piece < k && i == breaks[piece]) ++piece;
    x[i] = levels[piece];
  }
  return Signal(std::move(x));
}

MultiSignal sparse_gradient_image(int side, int dims, int k, const SeedSpec& seed,
                                  double amp_low, double amp_high) {
  if (side < 2 || dims < 1) throw InvalidArgument("sparse_gradient_image: bad grid");
  if (k < 0) throw InvalidArgument("sparse_gradient_image: k must be non-negative");
  if (!(amp_low < amp_high)) throw InvalidArgument("sparse_gradient_image: amp_low >= amp_high");
  const GridShape shape{side, dims};
  const Eigen::Index total = shape.total();
  Rng rng(seed);

  if (k == 0) return MultiSignal(Vector::Constant(total, rng.uniform(amp_low, amp_high)), side, dims);

  // An interior unit cell already costs 2*dims nonzeros; cap box extents so
  // that a single box cannot overshoot k by much.
  const int max_extent = std::clamp(k / (2 * dims), 1, side);
  const double max_abs = std::max(std::abs(amp_low), std::abs(amp_high));
  constexpr int kMaxAttempts = 100000;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Vector x = Vector::Constant(total, rng.uniform(amp_low, amp_high));
    int count = 0;
    while (count < k) {
      std::vector<int> lo(dims), hi(dims);
      for (int a = 0; a < dims; ++a) {
        const int ext = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_extent)));
        lo[a] = static_cast<int>(rng.index(static_cast<std::size_t>(side - ext + 1)));
        hi[a] = lo[a] + ext;
      }
      double level = 0.0;
      while (std::abs(level) < 0.05 * max_abs) level = rng.uniform(-max_abs, max_abs);
      for (Eigen::Index flat = 0; flat < total; ++flat) {
        Eigen::Index rem = flat;
        bool inside = true;
        for (int a = 0; a < dims && inside; ++a) {
          const int c = static_cast<int>(rem % side);
          rem /= side;
          inside = c >= lo[a] && c < hi[a];
        }
        if (inside) x[flat] += level;
      }
      count = count_nonzeros(diff(x, shape), 1e-9);
    }
    if (count == k) return MultiSignal(std::move(x), side, dims);
  }
  throw InvalidArgument("sparse_gradient_image: could not reach gradient sparsity " +
                        std::to_string(k));
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  unsigned w = workers > 0 ? static_cast<unsigned>(workers) : std::thread::hardware_concurrency();
  w = std::max(1u, std::min<unsigned>(w, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tvcs
