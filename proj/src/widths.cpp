#include "tvcs/widths.hpp"

#include "tvcs/haar.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace tvcs {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// sqrt(2 ln(e^(1/2) x)) = sqrt(1 + 2 ln x)
double log_factor(double x) { return std::sqrt(1.0 + 2.0 * std::log(x)); }

WidthEstimate summarize(const std::vector<double>& values) {
  WidthEstimate est;
  est.samples = static_cast<long>(values.size());
  // Welford, in index order.
  double mean = 0.0, m2 = 0.0;
  long count = 0;
  for (double v : values) {
    ++count;
    const double delta = v - mean;
    mean += delta / double(count);
    m2 += delta * (v - mean);
  }
  est.mean = mean;
  est.std_error = count > 1 ? std::sqrt(m2 / double(count - 1) / double(count)) : 0.0;
  return est;
}

}  // namespace

double width_gap_tol(const SolverConfig& cfg) { return std::sqrt(cfg.primal_tol); }

double relaxed_tv_radius(int k, int d) {
  if (k < 0 || d < 1) throw InvalidArgument("relaxed_tv_radius: need k >= 0, d >= 1");
  return 4.0 * std::sqrt(double(d)) * std::sqrt(double(k));
}

SupportValue relaxed_support_value(const Vector& g, const GridShape& shape, double radius,
                                   const SolverConfig& cfg) {
  cfg.validate();
  if (g.size() != shape.total()) throw InvalidArgument("relaxed_support_value: size mismatch");
  if (!(radius >= 0)) throw InvalidArgument("relaxed_support_value: radius must be >= 0");
  const SparseMatrix d = difference_matrix(shape);
  const double tol = width_gap_tol(cfg);
  SupportValue out;

  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.converged = true;
    return out;
  }
  // TV constraint inactive at the unconstrained maximizer g/||g||.
  if ((d * g).lpNorm<1>() <= radius * gnorm) {
    out.value = out.upper = gnorm;
    out.converged = true;
    return out;
  }

  const Eigen::Index n = g.size();
  SparseMatrix system(n, n);
  system.setIdentity();
  system += SparseMatrix(d.transpose() * d);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(system);
  if (ldlt.info() != Eigen::Success) throw Error("relaxed_support_value: factorization failed");

  double rho = cfg.penalty;
  int changes = 0;
  Vector x = Vector::Zero(n), p = Vector::Zero(n), a = Vector::Zero(n);
  Vector u = Vector::Zero(d.rows()), w = Vector::Zero(d.rows());
  double best_lower = 0.0, best_upper = gnorm;
  int it = 0;
  for (it = 1; it <= cfg.max_iters; ++it) {
    x = ldlt.solve(g / rho + (p - a) + d.transpose() * (u - w));
    const Vector dx = d * x;
    const Vector p_old = p, u_old = u;
    p = project_l2_ball(x + a, 1.0);
    u = project_l1_ball(dx + w, radius);
    a += x - p;
    w += dx - u;

    if (it % 10 != 0) continue;
    // Feasible point: shrink the non-constant part of x into the TV ball,
    // then scale into the unit ball.
    const double tv = dx.lpNorm<1>();
    const double mean = x.mean();
    const double t = tv > radius ? radius / tv : 1.0;
    const Vector z = (mean + t * (x.array() - mean)).matrix();
    best_lower = std::max(best_lower, g.dot(z) / std::max(1.0, z.norm()));
    // Weak duality with lambda = rho w.
    const Vector lambda = rho * w;
    best_upper = std::min(best_upper, (g - d.transpose() * lambda).norm() +
                                          radius * lambda.lpNorm<Eigen::Infinity>());
    if (best_upper - best_lower <= tol * std::max(best_upper, 1e-300)) {
      out.converged = true;
      break;
    }
    const double primal = std::sqrt((x - p).squaredNorm() + (dx - u).squaredNorm());
    const double dual = rho * (p - p_old + d.transpose() * (u - u_old)).norm();
    if (changes < 100 && (primal > 10.0 * dual || dual > 10.0 * primal)) {
      const double f = primal > dual ? 2.0 : 0.5;
      rho *= f;
      a /= f;
      w /= f;
      ++changes;
    }
  }
  out.iterations = std::min(it, cfg.max_iters);
  out.value = best_lower;
  out.upper = best_upper;
  return out;
}

WidthEstimate width_mc(int n, int k, int d, long samples, const SeedSpec& seed,
                       const SolverConfig& cfg, int workers) {
  if (samples < 2) throw InvalidArgument("width_mc: need at least 2 samples");
  if (d < 1) throw InvalidArgument("width_mc: d must be >= 1");
  if (d >= 2) haar_depth(n);
  const GridShape shape{n, d};
  if (n < 2) throw InvalidArgument("width_mc: n must be at least 2");
  const double radius = relaxed_tv_radius(k, d);
  constexpr int kAttempts = 10;

  std::vector<double> values(static_cast<std::size_t>(samples), 0.0);
  std::vector<long> rejects(static_cast<std::size_t>(samples), 0);
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      Rng rng(seed.child(i).child(static_cast<std::uint64_t>(attempt)));
      const SupportValue sv = relaxed_support_value(rng.gaussian_vector(shape.total()), shape, radius, cfg);
      if (sv.converged) {
        values[i] = sv.value;
        return;
      }
      ++rejects[i];
    }
    throw EstimatorUnstable("width_mc: sample " + std::to_string(i) + " failed every attempt");
  });

  WidthEstimate est = summarize(values);
  for (long r : rejects) est.rejected += r;
  est.per_sample_solver_tol = width_gap_tol(cfg);
  if (est.rejected * 10 > samples)
    throw EstimatorUnstable("width_mc: " + std::to_string(est.rejected) + " rejected samples out of " +
                            std::to_string(samples));
  return est;
}

double width_upper_bound_1d(int n, int k) {
  if (n <= 1 || k <= 1) throw OutOfRegime("width_upper_bound_1d: need n > 1 and k > 1");
  return (4.0 * kSqrt2 + 4.0) * std::pow(double(n) * double(k), 0.25) * log_factor(n);
}

double level_linf_bound(int n, int level) {
  const int depth = haar_depth(n);
  if (level < 1 || level > depth) throw InvalidArgument("level_linf_bound: bad level");
  const double block = std::ldexp(1.0, level);
  return std::sqrt(block) * log_factor(double(n) / block);
}

double width_level_sum_1d(int n, int k) {
  const int depth = haar_depth(n);
  if (k < 1) throw OutOfRegime("width_level_sum_1d: need k >= 1");
  double sum = std::sqrt(2.0 / std::numbers::pi);
  for (int l = 1; l <= depth; ++l) {
    const double block = std::ldexp(1.0, l);
    sum += std::min(std::sqrt(n / block), 2.0 * std::sqrt(block * k)) * log_factor(n / block);
  }
  return sum;
}

double width_lower_bound_1d(int n, int k) {
  if (n < 1 || k < 1) throw InvalidArgument("width_lower_bound_1d: need n, k >= 1");
  return std::sqrt(std::numbers::pi) / 4.0 * std::pow(double(n) * double(k), 0.25);
}

MeasurementLowerBound measurement_lower_bound(int n, int k, double eta) {
  if (!(eta > 0 && eta < 1)) throw InvalidArgument("measurement_lower_bound: eta must lie in (0, 1)");
  if (n < 1 || k < 0) throw InvalidArgument("measurement_lower_bound: bad n or k");
  MeasurementLowerBound b;
  b.raw = std::numbers::pi / 16.0 * std::sqrt(double(n) * k) -
          4.0 * std::sqrt(std::log(4.0 / eta)) * std::sqrt(double(n));
  b.vacuous = b.raw <= 0.0;
  b.value = std::max(0.0, b.raw);
  return b;
}

double width_upper_bound_nd(int n, int k, int d) {
  if (d < 2) throw InvalidArgument("width_upper_bound_nd: d must be >= 2");
  if (k < 1) throw OutOfRegime("width_upper_bound_nd: k must be >= 1");
  const int depth = haar_depth(n);
  const double lead = 8.0 * std::sqrt(double(d)) * (std::ldexp(1.0, d) - 1.0) * std::sqrt(double(k)) *
                      log_factor(std::pow(double(n), d));
  double levels;
  if (d == 2) {
    levels = depth;
  } else {
    const double q = std::pow(2.0, 1.0 - d / 2.0);
    levels = q / (1.0 - q);
  }
  return lead * levels + std::sqrt(3.0);
}

double required_measurements(int n, int k, int d) {
  const double w = d == 1 ? width_upper_bound_1d(n, k) : width_upper_bound_nd(n, k, d);
  return w * w;
}

bool LowerBoundConstruction::l2_constraint() const {
  const double n = double(witness.size());
  const double k = double(support.size());
  return nu * nu * n + mu * mu * k <= 1.0 + 1e-12;
}

bool LowerBoundConstruction::l1_constraint() const {
  const double n = double(witness.size());
  const double k = double(support.size());
  const double lhs = (2.0 * k - 1.0) * mu;
  const double rhs = 2.0 * nu * n / l_block;
  return lhs >= rhs * (1.0 - 1e-12);
}

bool LowerBoundConstruction::witness_in_set() const {
  const Restriction r = restrict_to(diff_1d(witness), support);
  const double scale = 1e-12 * (1.0 + r.on_support + r.off_support);
  return r.on_support + scale >= r.off_support && witness.values().norm() <= 1.0 + 1e-12;
}

LowerBoundConstruction lower_bound_construction(const Vector& g, int n, int k) {
  if (g.size() != n) throw InvalidArgument("lower_bound_construction: g must have length n");
  if (k < 1 || 3 * (k + 1) > n)
    throw OutOfRegime("lower_bound_construction: need 1 <= k <= n/3 - 1");

  LowerBoundConstruction c;
  c.mu = 1.0 / std::sqrt(2.0 * k);
  c.nu = 1.0 / std::sqrt(2.0 * n);
  c.l_block = std::sqrt(4.0 * n * k) / (2.0 * k - 1.0);
  c.l_int = std::max(1, static_cast<int>(std::lround(c.l_block)));
  c.h_blocks = (n - std::max(k + 1, c.l_int)) / c.l_int;

  const int body = c.h_blocks * c.l_int;
  const int tail = n - body;
  const int first_alt = n - k;  // tail = zeros, then k alternating +-1

  Vector x = Vector::Zero(n);
  double inner = 0.0;
  for (int b = 0; b < c.h_blocks; ++b) {
    const double s = g.segment(b * c.l_int, c.l_int).sum();
    const double sign = s >= 0 ? 1.0 : -1.0;
    x.segment(b * c.l_int, c.l_int).setConstant(c.nu * sign);
    inner += c.nu * std::abs(s);
  }
  Vector a = Vector::Zero(tail);
  for (int j = 0; j < k; ++j) a[first_alt - body + j] = (j % 2 == 0) ? 1.0 : -1.0;
  const double ta = g.tail(tail).dot(a);
  x.tail(tail) = c.mu * (ta >= 0 ? 1.0 : -1.0) * a;
  inner += c.mu * std::abs(ta);

  std::vector<int> support(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) support[static_cast<std::size_t>(j)] = first_alt - 1 + j;
  c.support = SupportSet(std::move(support));
  c.witness = Signal(std::move(x));
  c.inner_product = inner;
  return c;
}

WidthEstimate lower_bound_mc(int n, int k, long samples, const SeedSpec& seed) {
  if (samples < 2) throw InvalidArgument("lower_bound_mc: need at least 2 samples");
  std::vector<double> values(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    Rng rng(seed.child(static_cast<std::uint64_t>(i)));
    values[static_cast<std::size_t>(i)] = lower_bound_construction(rng.gaussian_vector(n), n, k).inner_product;
  }
  return summarize(values);
}

}  // namespace tvcs
