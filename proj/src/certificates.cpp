#include "tvcs/certificates.hpp"

#include "tvcs/lp.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace tvcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All subsets of {0..p-1} with at most k elements, in order of size then
// lexicographic.
std::vector<std::vector<int>> enumerate_supports(int p, int k) {
  std::vector<std::vector<int>> out;
  for (int size = 0; size <= std::min(k, p); ++size) {
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      out.push_back(idx);
      int i = size - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - size + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

// max s^T (B w)_K  s.t.  ||(B w)_Kc||_1 <= 1, as a standard-form LP in
// [w+ (r), w- (r), v+ (q), v- (q), slack].
double support_sign_lp(const Matrix& b, const std::vector<int>& support, const std::vector<double>& signs) {
  const Eigen::Index p = b.rows();
  const Eigen::Index r = b.cols();
  std::vector<Eigen::Index> off;
  std::size_t next = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (next < support.size() && support[next] == i) {
      ++next;
      continue;
    }
    off.push_back(i);
  }
  const Eigen::Index q = static_cast<Eigen::Index>(off.size());
  const Eigen::Index cols = 2 * r + 2 * q + 1;
  Matrix lp = Matrix::Zero(q + 1, cols);
  Vector rhs = Vector::Zero(q + 1);
  for (Eigen::Index j = 0; j < q; ++j) {
    lp.row(j).head(r) = b.row(off[std::size_t(j)]);
    lp.row(j).segment(r, r) = -b.row(off[std::size_t(j)]);
    lp(j, 2 * r + j) = -1.0;
    lp(j, 2 * r + q + j) = 1.0;
  }
  lp.row(q).segment(2 * r, 2 * q).setOnes();
  lp(q, cols - 1) = 1.0;
  rhs[q] = 1.0;

  Vector objective_row = Vector::Zero(r);
  for (std::size_t j = 0; j < support.size(); ++j) objective_row += signs[j] * b.row(support[j]).transpose();
  Vector cost = Vector::Zero(cols);
  cost.head(r) = -objective_row;
  cost.segment(r, r) = objective_row;

  const LpResult res = solve_standard_lp(lp, rhs, cost);
  if (res.status == LpStatus::unbounded) return kInf;
  if (res.status != LpStatus::optimal) throw Error("certificate LP did not reach an optimum");
  return std::max(0.0, -res.objective);
}

CertReport enumerate_condition(const MeasurementEnsemble& a, int k, double threshold, int workers) {
  const Eigen::Index n = a.n_cols();
  if (n > kCertificateMaxN)
    throw ScaleGuard("certificate: N = " + std::to_string(n) + " exceeds the limit of " +
                     std::to_string(kCertificateMaxN));
  if (k > kCertificateMaxK)
    throw ScaleGuard("certificate: k = " + std::to_string(k) + " exceeds the limit of " +
                     std::to_string(kCertificateMaxK));
  if (k < 0) throw InvalidArgument("certificate: k must be non-negative");

  CertReport report;
  const NullBasis h = null_space_basis(a);
  if (h.dim() == 0) {
    report.holds = true;
    return report;
  }
  const Matrix b = difference_matrix(GridShape::line(static_cast<int>(n))) * h.basis;
  // A null vector with zero TV violates the strict inequality for every K.
  // h.basis is orthonormal, so the singular values of b are ||Dz|| over unit z.
  if (b.rows() < b.cols() || Eigen::JacobiSVD<Matrix>(b).singularValues().minCoeff() <= 1e-10) {
    report.holds = false;
    report.worst_ratio = kInf;
    return report;
  }

  const auto supports = enumerate_supports(static_cast<int>(b.rows()), k);
  std::vector<double> ratios(supports.size(), 0.0);
  std::vector<long> lps(supports.size(), 0);
  parallel_for(supports.size(), workers, [&](std::size_t i) {
    const auto& support = supports[i];
    if (support.empty()) return;
    // s and -s give the same optimum, so the first sign is fixed to +.
    const int patterns = 1 << (support.size() - 1);
    double worst = 0.0;
    for (int mask = 0; mask < patterns; ++mask) {
      std::vector<double> signs(support.size(), 1.0);
      for (std::size_t j = 1; j < support.size(); ++j)
        if ((mask >> (j - 1)) & 1) signs[j] = -1.0;
      worst = std::max(worst, support_sign_lp(b, support, signs));
      ++lps[i];
      if (std::isinf(worst)) break;
    }
    ratios[i] = worst;
  });

  std::size_t arg = 0;
  for (std::size_t i = 0; i < supports.size(); ++i) {
    report.work += lps[i];
    if (ratios[i] > ratios[arg]) arg = i;
  }
  report.worst_ratio = ratios[arg];
  report.worst_support = SupportSet(supports[arg]);
  report.holds = report.worst_ratio < threshold;
  return report;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

// Starting direction for restart r: H^T g, g ~ N(0, I_N).
Vector random_start(const NullBasis& h, const SeedSpec& seed) {
  Rng rng(seed);
  Vector w = h.basis.transpose() * rng.gaussian_vector(h.basis.rows());
  const double nw = w.norm();
  if (nw == 0.0) {
    w = Vector::Zero(h.dim());
    w[0] = 1.0;
    return w;
  }
  return w / nw;
}

}  // namespace

CertReport null_space_condition(const MeasurementEnsemble& a, int k, int workers) {
  return enumerate_condition(a, k, 1.0, workers);
}

CertReport balanced_condition(const MeasurementEnsemble& a, int k, double c, int workers) {
  if (!(c > 0.0 && c <= 1.0)) throw InvalidArgument("balanced_condition: c must lie in (0, 1]");
  return enumerate_condition(a, k, c, workers);
}

// Local minima of ||Bw||_1 on the unit sphere sit on extreme rays of the
// sign cones, where r - 1 rows of B w vanish. Along an edge (r - 2 rows held
// at zero) the objective is R cos(theta - phi) between breakpoints, hence
// concave, so its minimum is at an adjacent vertex.
class VertexWalk {
 public:
  explicit VertexWalk(const Matrix& b) : b_(b), r_(b.cols()) {}

  // Vertex annihilated by the r - 1 smallest entries of B w, then descent
  // over adjacent vertices. Returns +inf when no vertex is found.
  double run(const Vector& w) {
    if (r_ < 2 || b_.rows() < r_ - 1) return kInf;
    const Vector bw = b_ * w;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(b_.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = Eigen::Index(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return std::abs(bw[x]) < std::abs(bw[y]); });
    std::vector<Eigen::Index> zeros(order.begin(), order.begin() + (r_ - 1));
    double value = kInf;

    for (int step = 0; step < 1000; ++step) {
      // Null vector v of the zero rows; column j of the pseudo-inverse is the
      // edge direction that releases zero row j.
      Matrix m(r_ - 1, r_);
      for (Eigen::Index j = 0; j < r_ - 1; ++j) m.row(j) = b_.row(zeros[std::size_t(j)]);
      Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector& sv = svd.singularValues();
      if (sv[r_ - 2] <= 1e-10 * std::max(1.0, sv[0])) return value;
      const Vector v = svd.matrixV().col(r_ - 1);
      const Matrix pinv =
          svd.matrixV().leftCols(r_ - 1) * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
      const Vector bv = b_ * v;
      value = bv.lpNorm<1>();

      std::vector<char> is_zero(static_cast<std::size_t>(b_.rows()), 0);
      for (Eigen::Index z : zeros) is_zero[std::size_t(z)] = 1;
      double best_value = value * (1.0 - 1e-13);
      std::size_t best_j = 0;
      Eigen::Index best_hit = -1;
      for (std::size_t j = 0; j < zeros.size(); ++j) {
        const Vector e = pinv.col(Eigen::Index(j)).normalized();
        const Vector be = b_ * e;
        for (double dir : {1.0, -1.0}) {
          double theta = kInf;
          Eigen::Index hit = -1;
          for (Eigen::Index i = 0; i < b_.rows(); ++i) {
            if (is_zero[std::size_t(i)] || be[i] == 0.0) continue;
            double t = std::atan(-bv[i] / (dir * be[i]));
            if (t <= 1e-12) t += std::numbers::pi;
            if (t < theta) {
              theta = t;
              hit = i;
            }
          }
          if (hit < 0) continue;
          const double cv = (std::cos(theta) * bv + std::sin(theta) * dir * be).lpNorm<1>();
          if (cv < best_value) {
            best_value = cv;
            best_j = j;
            best_hit = hit;
          }
        }
      }
      if (best_hit < 0) break;
      zeros[best_j] = best_hit;
    }
    return value;
  }

 private:
  const Matrix& b_;
  Eigen::Index r_;
};

double almost_euclidean_beta(const NullBasis& h, int restarts, const SeedSpec& seed) {
  if (restarts < 1) throw InvalidArgument("almost_euclidean_beta: restarts must be >= 1");
  if (h.dim() == 0) return kInf;
  const Eigen::Index n = h.basis.rows();
  const Matrix b = difference_matrix(GridShape::line(static_cast<int>(n))) * h.basis;
  const double scale = 1.0 / std::sqrt(double(n));
  constexpr int kIters = 500;

  double best = kInf;
  for (int r = 0; r < restarts; ++r) {
    Vector w = random_start(h, seed.child(static_cast<std::uint64_t>(r)));
    Vector w_best = w;
    double restart_best = kInf;
    for (int it = 1; it <= kIters + 1; ++it) {
      const Vector bw = b * w;
      const double value = bw.lpNorm<1>() * scale;
      if (value < restart_best) {
        restart_best = value;
        w_best = w;
      }
      if (it > kIters) break;
      const Vector sub = b.transpose() * bw.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
      Vector tangent = sub - sub.dot(w) * w;
      const double nt = tangent.norm();
      if (nt == 0.0) break;
      w -= tangent / (nt * std::sqrt(double(it)));
      w.normalize();
    }
    best = std::min({best, restart_best, VertexWalk(b).run(w_best) * scale});
  }
  return best;
}

double partial_tv_sup(const NullBasis& h, int k, int trials, const SeedSpec& seed) {
  if (trials < 1) throw InvalidArgument("partial_tv_sup: trials must be >= 1");
  const Eigen::Index n = h.basis.rows();
  if (k < 0 || k > n - 1) throw InvalidArgument("partial_tv_sup: need 0 <= k <= N-1");
  if (k == 0 || h.dim() == 0) return 0.0;
  const Matrix b = difference_matrix(GridShape::line(static_cast<int>(n))) * h.basis;
  constexpr int kIters = 200;

  double best = 0.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(b.rows()));
  for (int t = 0; t < trials; ++t) {
    Vector w = random_start(h, seed.child(static_cast<std::uint64_t>(t)));
    for (int it = 1; it <= kIters; ++it) {
      const Vector bw = b * w;
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = Eigen::Index(i);
      std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                       [&](Eigen::Index x, Eigen::Index y) { return std::abs(bw[x]) > std::abs(bw[y]); });
      double value = 0.0;
      Vector sub = Vector::Zero(w.size());
      for (int j = 0; j < k; ++j) {
        const Eigen::Index i = order[std::size_t(j)];
        value += std::abs(bw[i]);
        sub += (bw[i] >= 0 ? 1.0 : -1.0) * b.row(i).transpose();
      }
      best = std::max(best, value);
      Vector tangent = sub - sub.dot(w) * w;
      const double nt = tangent.norm();
      if (nt == 0.0) break;
      w += tangent / (nt * std::sqrt(double(it)));
      w.normalize();
    }
    best = std::max(best, ksum_largest(GradField{b * w}, k));
  }
  return best;
}

double deviation_exponent(double gamma, int t) {
  if (!(gamma > 0)) throw InvalidArgument("deviation_exponent: gamma must be > 0");
  if (t < 2) throw InvalidArgument("deviation_exponent: T must be >= 2");
  const double inv = 1.0 / double(t);
  return -(binary_entropy(inv) +
           (1.0 - inv) * std::log(double(t) * gamma / std::sqrt(2.0 * std::numbers::pi)));
}

DeviationEstimate tv_small_prob(int n, double gamma, long samples, const SeedSpec& seed, int workers) {
  if (n < 2) throw InvalidArgument("tv_small_prob: n must be at least 2");
  if (!(gamma >= 0)) throw InvalidArgument("tv_small_prob: gamma must be >= 0");
  if (samples < 1000) throw InvalidArgument("tv_small_prob: need at least 1000 samples");

  constexpr long kChunk = 10000;
  const long chunks = (samples + kChunk - 1) / kChunk;
  std::vector<long> hits(static_cast<std::size_t>(chunks), 0);
  const double threshold = gamma * n;
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    Rng rng(seed.child(c));
    const long count = std::min(kChunk, samples - long(c) * kChunk);
    std::vector<double> x(static_cast<std::size_t>(n));
    long local = 0;
    for (long s = 0; s < count; ++s) {
      for (auto& v : x) v = rng.normal();
      double tv = 0.0;
      for (int i = 0; i + 1 < n; ++i) tv += std::abs(x[i + 1] - x[i]);
      if (tv <= threshold) ++local;
    }
    hits[c] = local;
  });

  DeviationEstimate est;
  est.gamma = gamma;
  est.n = n;
  est.samples = samples;
  for (long h : hits) est.hits += h;
  est.probability = double(est.hits) / double(samples);
  const double p = est.hits > 0 ? est.probability : 3.0 / double(samples);
  est.empirical_log_prob_per_n = std::log(p) / n;

  if (gamma > 0) {
    est.bound_exponent = -kInf;
    est.loosest_exponent = kInf;
    for (int t = 2; t <= 64; ++t) {
      const double e = deviation_exponent(gamma, t);
      if (e > est.bound_exponent) {
        est.bound_exponent = e;
        est.best_t = t;
      }
      est.loosest_exponent = std::min(est.loosest_exponent, e);
    }
  } else {
    est.bound_exponent = kInf;
    est.loosest_exponent = kInf;
  }
  return est;
}

}  // namespace tvcs
