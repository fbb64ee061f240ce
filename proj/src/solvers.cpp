#include "tvcs/solvers.hpp"

#include "tvcs/lp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace tvcs {

void SolverConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("SolverConfig: max_iters must be >= 1");
  if (!(primal_tol > 0) || !(dual_tol > 0)) throw InvalidArgument("SolverConfig: tolerances must be > 0");
  if (!(penalty > 0)) throw InvalidArgument("SolverConfig: penalty must be > 0");
  if (!(over_relax >= 1.0 && over_relax <= 1.9))
    throw InvalidArgument("SolverConfig: over_relax must lie in [1, 1.9]");
}

void StabilityInputs::validate() const {
  if (!(c_balance > 0 && c_balance < 1)) throw InvalidArgument("stability: C must lie in (0, 1)");
  if (!(beta > 0)) throw InvalidArgument("stability: beta must be > 0");
  if (!(delta >= 0 && delta < 1)) throw InvalidArgument("stability: delta must lie in [0, 1)");
  if (!(epsilon >= 0)) throw InvalidArgument("stability: epsilon must be >= 0");
}

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

Vector project_l2_ball(const Vector& v, double radius) {
  const double nv = v.norm();
  return nv <= radius ? v : Vector(v * (radius / nv));
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  if (radius <= 0) return Vector::Zero(v.size());
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumsum += mags[j];
    const double t = (cumsum - radius) / double(j + 1);
    if (mags[j] - t > 0) theta = t;
  }
  return soft_threshold(v, theta);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Orthogonal decomposition of A^T = [Q1 Q2] [R1; 0]: particular solutions
// of Ax = v and a null-space basis.
class RowSpace {
 public:
  explicit RowSpace(const Matrix& a) : m_(a.rows()), n_(a.cols()), qr_(a.transpose()) {
    if (m_ > n_) throw InvalidArgument("more measurements than unknowns");
    const auto diag = qr_.matrixQR().diagonal().head(m_).cwiseAbs();
    if (m_ > 0 && diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
      throw DegenerateEnsemble("measurement matrix is rank deficient");
    q_ = qr_.householderQ() * Matrix::Identity(n_, n_);
  }

  /// Minimum-norm x with A x = v.
  Vector min_norm_solve(const Vector& v) const {
    if (m_ == 0) return Vector::Zero(n_);
    const auto r1 = qr_.matrixQR().topLeftCorner(m_, m_).triangularView<Eigen::Upper>();
    const Vector c = r1.transpose().solve(v);
    return q_.leftCols(m_) * c;
  }

  Matrix null_basis() const { return q_.rightCols(n_ - m_); }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::HouseholderQR<Matrix> qr_;
  Matrix q_;
};

void check_dimensions(const MeasurementEnsemble& a, const Vector& y, const GridShape& shape) {
  if (y.size() != a.m_rows())
    throw InvalidArgument("measurement vector has length " + std::to_string(y.size()) +
                          ", expected " + std::to_string(a.m_rows()));
  if (shape.side < 2 || shape.dims < 1 || a.n_cols() != shape.total())
    throw InvalidArgument("matrix columns do not match the signal shape");
  if (a.m_rows() < 1) throw InvalidArgument("need at least one measurement");
  if (!y.allFinite()) throw InvalidArgument("measurements must be finite");
}

// Residual balancing shared by both programs.
struct Penalty {
  double rho;
  int changes = 0;

  // Returns the factor applied to rho (scaled duals must be divided by it).
  double balance(double primal, double dual) {
    if (changes >= 100) return 1.0;
    if (primal > 10.0 * dual) {
      ++changes;
      rho *= 2.0;
      return 2.0;
    }
    if (dual > 10.0 * primal) {
      ++changes;
      rho /= 2.0;
      return 0.5;
    }
    return 1.0;
  }
};

constexpr int kCheckEvery = 5;
constexpr double kAbsTol = 1e-12;

// Re-solve on the face identified by ADMM: keep (Dx)_i = 0 off the support
// of u and solve for the remaining freedom exactly. Accepted only if the
// system is consistent, signs on the support are preserved and the TV does
// not increase.
bool polish_equality(const Matrix& b, const Vector& c, const Vector& u, Vector& t) {
  std::vector<Eigen::Index> zero_rows;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] == 0.0) zero_rows.push_back(i);
  if (zero_rows.empty()) return false;
  Matrix bz(static_cast<Eigen::Index>(zero_rows.size()), b.cols());
  Vector cz(bz.rows());
  for (std::size_t j = 0; j < zero_rows.size(); ++j) {
    bz.row(Eigen::Index(j)) = b.row(zero_rows[j]);
    cz[Eigen::Index(j)] = c[zero_rows[j]];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(bz);
  Vector delta = qr.solve(-(cz + bz * t));
  Vector candidate = t + delta;
  const Vector g_old = c + b * t;
  const Vector g_new = c + b * candidate;
  const double scale = 1.0 + g_old.lpNorm<Eigen::Infinity>();
  for (auto i : zero_rows)
    if (std::abs(g_new[i]) > 1e-9 * scale) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] != 0.0 && g_new[i] * u[i] < 0.0) return false;
  if (g_new.lpNorm<1>() > g_old.lpNorm<1>() + 1e-12 * scale) return false;
  t = std::move(candidate);
  return true;
}

// Exact optimality test at the polished point: a multiplier lambda with
// B^T lambda = 0, lambda = sign(g) where g = c + B t is nonzero and
// |lambda| <= 1 elsewhere. The free entries are the least-change correction
// of the ADMM multiplier.
bool certify_optimal(const Matrix& b, const Vector& c, const Vector& u, const Vector& lambda0, Vector& t) {
  Vector cand = t;
  if (!polish_equality(b, c, u, cand)) return false;
  const Vector g = c + b * cand;
  const double scale = 1.0 + g.lpNorm<Eigen::Infinity>();
  std::vector<Eigen::Index> free_rows;
  Vector fixed = Vector::Zero(b.cols());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) > 1e-9 * scale)
      fixed += (g[i] > 0 ? 1.0 : -1.0) * b.row(i).transpose();
    else
      free_rows.push_back(i);
  }
  if (free_rows.empty()) return fixed.norm() <= 1e-9 * (1.0 + b.norm());
  Matrix bf(b.cols(), static_cast<Eigen::Index>(free_rows.size()));
  Vector l0(bf.cols());
  for (std::size_t j = 0; j < free_rows.size(); ++j) {
    bf.col(Eigen::Index(j)) = b.row(free_rows[j]).transpose();
    l0[Eigen::Index(j)] = std::clamp(lambda0[free_rows[j]], -1.0, 1.0);
  }
  const Vector rhs = -fixed - bf * l0;
  const Vector lambda = l0 + Eigen::CompleteOrthogonalDecomposition<Matrix>(bf).solve(rhs);
  if ((bf * lambda + fixed).norm() > 1e-9 * (1.0 + b.norm())) return false;
  if (lambda.lpNorm<Eigen::Infinity>() > 1.0 + 1e-9) return false;
  t = std::move(cand);
  return true;
}

// Noisy analogue of certify_optimal. On the face {(Dx)_i = 0 off supp(u)}
// with x = F theta the program is a linear objective over an ellipsoid:
//   theta = theta_ls - kappa G^-1 v / sqrt(v^T G^-1 v),  G = (AF)^T AF.
// Optimality needs lambda = sign(Dx) on the support, |lambda| <= 1 elsewhere
// and D^T lambda + mu A^T (Ax - y) = 0 with mu >= 0.
enum class FaceStatus { optimal, drop, add, fail };

struct FaceResult {
  FaceStatus status = FaceStatus::fail;
  std::vector<Eigen::Index> indices;  ///< entries to drop, or the entry to add
  double sign = 0.0;                  ///< sign of the entry to add
};

// Solves the program on one face; `face` holds the guessed sign of Dx (0 off
// the support).
FaceResult solve_noise_face(const Matrix& dd, const Matrix& am, const Vector& y, double epsilon,
                            const Vector& face, const Vector& lambda0, Vector& x) {
  FaceResult out;
  std::vector<Eigen::Index> on, off;
  for (Eigen::Index i = 0; i < face.size(); ++i) (face[i] != 0.0 ? on : off).push_back(i);
  if (on.empty() || off.empty()) return out;
  const Eigen::Index n = dd.cols();
  Matrix d_off(static_cast<Eigen::Index>(off.size()), n), d_on(static_cast<Eigen::Index>(on.size()), n);
  Vector sign(d_on.rows());
  for (std::size_t j = 0; j < off.size(); ++j) d_off.row(Eigen::Index(j)) = dd.row(off[j]);
  for (std::size_t j = 0; j < on.size(); ++j) {
    d_on.row(Eigen::Index(j)) = dd.row(on[j]);
    sign[Eigen::Index(j)] = face[on[j]];
  }

  Eigen::ColPivHouseholderQR<Matrix> face_qr(d_off.transpose());
  face_qr.setThreshold(1e-10);
  const Eigen::Index rank = face_qr.rank();
  if (rank == n) return out;
  const Matrix q = face_qr.householderQ() * Matrix::Identity(n, n);
  const Matrix f = q.rightCols(n - rank);
  const Matrix af = am * f;
  Eigen::LLT<Matrix> g(af.transpose() * af);
  if (g.info() != Eigen::Success) return out;
  const Vector theta_ls = g.solve(af.transpose() * y);
  const double r_ls = (af * theta_ls - y).norm();
  if (r_ls >= epsilon) return out;
  const Vector v = f.transpose() * (d_on.transpose() * sign);
  const Vector giv = g.solve(v);
  const double vgv = v.dot(giv);
  if (!(vgv > 0)) return out;
  const double kappa = std::sqrt(epsilon * epsilon - r_ls * r_ls);
  const Vector cand = f * (theta_ls - (kappa / std::sqrt(vgv)) * giv);

  const Vector g_on = d_on * cand;
  for (Eigen::Index j = 0; j < g_on.size(); ++j)
    if (g_on[j] * sign[j] <= 0) out.indices.push_back(on[std::size_t(j)]);
  if (!out.indices.empty()) {
    out.status = FaceStatus::drop;
    return out;
  }
  const double mu = std::sqrt(vgv) / kappa;
  const Vector fixed = d_on.transpose() * sign + mu * (am.transpose() * (am * cand - y));
  Vector l0(d_off.rows());
  for (std::size_t j = 0; j < off.size(); ++j) l0[Eigen::Index(j)] = std::clamp(lambda0[off[j]], -1.0, 1.0);
  const Matrix dt = d_off.transpose();
  const Vector lambda = l0 + Eigen::CompleteOrthogonalDecomposition<Matrix>(dt).solve(Vector(-fixed - dt * l0));
  const double scale = 1.0 + std::sqrt(double(on.size())) * 2.0;
  if ((dt * lambda + fixed).norm() > 1e-9 * scale) return out;
  Eigen::Index worst = 0;
  if (lambda.cwiseAbs().maxCoeff(&worst) > 1.0 + 1e-9) {
    out.status = FaceStatus::add;
    out.indices.push_back(off[std::size_t(worst)]);
    out.sign = lambda[worst] > 0 ? 1.0 : -1.0;
    return out;
  }
  out.status = FaceStatus::optimal;
  x = cand;
  return out;
}

// Exact optimality for the noisy program by a short active-set walk that
// starts from the support of u: entries whose sign flips are dropped, and the
// most violated multiplier entry is added.
bool certify_noise_optimal(const SparseMatrix& d, const Matrix& am, const Vector& y, double epsilon,
                           const Vector& u, const Vector& lambda0, Vector& x) {
  const Matrix dd(d);
  Vector face = u.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
  for (int step = 0; step < 2 * static_cast<int>(std::sqrt(double(face.size()))) + 4; ++step) {
    const FaceResult r = solve_noise_face(dd, am, y, epsilon, face, lambda0, x);
    switch (r.status) {
      case FaceStatus::optimal:
        return true;
      case FaceStatus::drop:
        for (auto i : r.indices) face[i] = 0.0;
        break;
      case FaceStatus::add:
        face[r.indices.front()] = r.sign;
        break;
      case FaceStatus::fail:
        return false;
    }
  }
  return false;
}

}  // namespace

SolveReport tv_min_eq(const MeasurementEnsemble& a, const Vector& y, const GridShape& shape,
                      const SolverConfig& cfg) {
  cfg.validate();
  check_dimensions(a, y, shape);
  const auto t0 = Clock::now();

  const RowSpace rows(a.matrix);
  const Vector xp = rows.min_norm_solve(y);
  SolveReport report;
  report.shape = shape;

  const Eigen::Index r = a.n_cols() - a.m_rows();
  if (r == 0) {
    report.solution = xp;
    report.converged = true;
  } else {
    const SparseMatrix d = difference_matrix(shape);
    const Matrix z = rows.null_basis();
    const Matrix b = d * z;
    const Vector c = d * xp;
    Matrix gram = b.transpose() * b;
    Eigen::LLT<Matrix> chol(gram);
    if (chol.info() != Eigen::Success) {
      // A constant vector lies in null(A); any minimizer along it will do.
      gram.diagonal().array() += 1e-12 * std::max(1.0, gram.trace() / double(r));
      chol.compute(gram);
    }

    const double alpha = cfg.over_relax;
    Penalty pen{cfg.penalty};
    Vector t = Vector::Zero(r);
    Vector u = c;
    Vector w = Vector::Zero(c.size());
    Vector dx = c;
    const double sqrt_p = std::sqrt(double(c.size()));
    const double sqrt_r = std::sqrt(double(r));

    int it = 0;
    int next_certify = 50;
    bool certified = false;
    for (it = 1; it <= cfg.max_iters; ++it) {
      t = chol.solve(b.transpose() * (u - w - c));
      dx.noalias() = b * t;
      dx += c;
      const Vector h = alpha * dx + (1.0 - alpha) * u;
      Vector u_old = std::move(u);
      u = soft_threshold(h + w, 1.0 / pen.rho);
      w += h - u;

      if (it % kCheckEvery != 0) continue;
      const double primal = (dx - u).norm();
      const double dual = pen.rho * (b.transpose() * (u - u_old)).norm();
      const double eps_pri = sqrt_p * kAbsTol + cfg.primal_tol * std::max(dx.norm(), u.norm());
      const double eps_dual = sqrt_r * kAbsTol + cfg.dual_tol * pen.rho * w.norm();
      if (primal <= eps_pri && dual <= eps_dual) {
        report.converged = true;
        break;
      }
      if (it >= next_certify) {
        next_certify = it + std::max(50, it / 8);
        if (certify_optimal(b, c, u, pen.rho * w, t)) {
          report.converged = certified = true;
          break;
        }
      }
      const double f = pen.balance(primal / std::max(eps_pri, 1e-300),
                                   dual / std::max(eps_dual, 1e-300));
      if (f != 1.0) w /= f;
    }
    report.iterations = std::min(it, cfg.max_iters);
    if (report.converged && !certified) polish_equality(b, c, u, t);
    report.solution = xp + z * t;
  }

  report.objective = tv_norm(report.solution, shape);
  report.primal_residual = (a.matrix * report.solution - y).norm();
  if (report.converged)
    report.converged = report.primal_residual <= std::max(cfg.primal_tol * y.norm(), 1e-10);
  report.wall_time = seconds_since(t0);
  return report;
}

SolveReport tv_min_eq(const MeasurementEnsemble& a, const Vector& y, const SolverConfig& cfg) {
  return tv_min_eq(a, y, GridShape::line(static_cast<int>(a.n_cols())), cfg);
}

SolveReport tv_min_noise(const MeasurementEnsemble& a, const Vector& y, double epsilon,
                         const GridShape& shape, const SolverConfig& cfg) {
  if (!(epsilon >= 0)) throw InvalidArgument("tv_min_noise: epsilon must be >= 0");
  if (epsilon == 0.0) return tv_min_eq(a, y, shape, cfg);
  cfg.validate();
  check_dimensions(a, y, shape);
  const auto t0 = Clock::now();
  const RowSpace rows(a.matrix);
  const Matrix& am = a.matrix;
  SolveReport report;
  report.shape = shape;

  if (y.norm() <= epsilon) {
    // A constant is feasible, so the optimum is 0; take the level closest to y.
    const Vector ones = am * Vector::Ones(am.cols());
    const double level = ones.squaredNorm() > 0 ? ones.dot(y) / ones.squaredNorm() : 0.0;
    report.solution = Vector::Constant(am.cols(), level);
    report.converged = true;
  } else {
    const SparseMatrix d = difference_matrix(shape);
    const Matrix dd = Matrix(d.transpose() * d);
    Matrix k = dd + am.transpose() * am;
    Eigen::LLT<Matrix> chol(k);
    if (chol.info() != Eigen::Success) {
      k.diagonal().array() += 1e-12 * std::max(1.0, k.trace() / double(k.rows()));
      chol.compute(k);
    }

    const double alpha = cfg.over_relax;
    Penalty pen{cfg.penalty};
    const Eigen::Index p = d.rows();
    const Eigen::Index m = am.rows();
    Vector x = rows.min_norm_solve(y);
    Vector u = d * x, w = Vector::Zero(p);
    Vector res = project_l2_ball(am * x - y, epsilon), q = Vector::Zero(m);
    const double sqrt_dim = std::sqrt(double(p + m));
    int it = 0;
    int next_certify = 50;
    bool certified = false;
    for (it = 1; it <= cfg.max_iters; ++it) {
      x = chol.solve(d.transpose() * (u - w) + am.transpose() * (y + res - q));
      const Vector dx = d * x;
      const Vector e = am * x - y;
      const Vector hd = alpha * dx + (1.0 - alpha) * u;
      const Vector ha = alpha * e + (1.0 - alpha) * res;
      Vector u_old = std::move(u);
      Vector res_old = std::move(res);
      u = soft_threshold(hd + w, 1.0 / pen.rho);
      res = project_l2_ball(ha + q, epsilon);
      w += hd - u;
      q += ha - res;

      if (it % kCheckEvery != 0) continue;
      const double primal = std::sqrt((dx - u).squaredNorm() + (e - res).squaredNorm());
      const double dual =
          pen.rho * (d.transpose() * (u - u_old) + am.transpose() * (res - res_old)).norm();
      const double lhs = std::sqrt(dx.squaredNorm() + e.squaredNorm());
      const double rhs = std::sqrt(u.squaredNorm() + res.squaredNorm());
      const double eps_pri = sqrt_dim * kAbsTol + cfg.primal_tol * std::max(lhs, rhs);
      const double eps_dual =
          sqrt_dim * kAbsTol + cfg.dual_tol * pen.rho * std::sqrt(w.squaredNorm() + q.squaredNorm());
      if (primal <= eps_pri && dual <= eps_dual) {
        report.converged = true;
        break;
      }
      if (it >= next_certify) {
        next_certify = it + std::max(50, it / 8);
        if (certify_noise_optimal(d, am, y, epsilon, u, pen.rho * w, x)) {
          report.converged = certified = true;
          break;
        }
      }
      const double f = pen.balance(primal / std::max(eps_pri, 1e-300),
                                   dual / std::max(eps_dual, 1e-300));
      if (f != 1.0) {
        w /= f;
        q /= f;
      }
    }
    report.iterations = std::min(it, cfg.max_iters);
    // Minimum-norm correction onto the residual ball.
    const Vector e = am * x - y;
    if (!certified && e.norm() > epsilon) x -= rows.min_norm_solve(e - project_l2_ball(e, epsilon));
    report.solution = std::move(x);
  }

  report.objective = tv_norm(report.solution, shape);
  report.primal_residual = (am * report.solution - y).norm();
  if (report.converged)
    report.converged = report.primal_residual <= epsilon * (1.0 + cfg.primal_tol) + 1e-12;
  report.wall_time = seconds_since(t0);
  return report;
}

SolveReport tv_min_noise(const MeasurementEnsemble& a, const Vector& y, double epsilon,
                         const SolverConfig& cfg) {
  return tv_min_noise(a, y, epsilon, GridShape::line(static_cast<int>(a.n_cols())), cfg);
}

Signal lp_oracle_tv_min(const MeasurementEnsemble& a, const Vector& y) {
  const Eigen::Index n = a.n_cols();
  const Eigen::Index m = a.m_rows();
  if (n > kLpOracleMaxN)
    throw ScaleGuard("lp_oracle_tv_min: N = " + std::to_string(n) + " exceeds the oracle limit of " +
                     std::to_string(kLpOracleMaxN));
  if (n < 2) throw InvalidArgument("lp_oracle_tv_min: N must be at least 2");
  if (y.size() != m) throw InvalidArgument("lp_oracle_tv_min: measurement length mismatch");

  // Variables [x+ (n), x- (n), u+ (n-1), u- (n-1)], all >= 0.
  const Eigen::Index p = n - 1;
  const Eigen::Index cols = 2 * n + 2 * p;
  Matrix lp = Matrix::Zero(p + m, cols);
  Vector rhs = Vector::Zero(p + m);
  for (Eigen::Index i = 0; i < p; ++i) {
    lp(i, i + 1) = 1.0;
    lp(i, i) = -1.0;
    lp(i, n + i + 1) = -1.0;
    lp(i, n + i) = 1.0;
    lp(i, 2 * n + i) = -1.0;
    lp(i, 2 * n + p + i) = 1.0;
  }
  lp.bottomLeftCorner(m, n) = a.matrix;
  lp.block(p, n, m, n) = -a.matrix;
  rhs.tail(m) = y;
  Vector cost = Vector::Zero(cols);
  cost.tail(2 * p).setOnes();

  const LpResult res = solve_standard_lp(lp, rhs, cost);
  if (res.status == LpStatus::infeasible) throw Infeasible("lp_oracle_tv_min: Ax = y is infeasible");
  if (res.status != LpStatus::optimal) throw Error("lp_oracle_tv_min: simplex did not finish");
  return Signal(res.solution.head(n) - res.solution.segment(n, n));
}

double stability_bound(const Signal& x, const StabilityInputs& inputs, int m, double sigma_min) {
  inputs.validate();
  if (!(sigma_min > 0)) throw InvalidArgument("stability_bound: sigma_min must be > 0");
  if (m < 0) throw InvalidArgument("stability_bound: m must be >= 0");
  const double n = double(x.size());
  const GradField g = diff_1d(x);
  const int support = std::min<int>(static_cast<int>(std::floor(inputs.delta * n)), int(g.size()));
  const double tail = std::max(0.0, g.values.lpNorm<1>() - ksum_largest(g, support));
  const double c = inputs.c_balance;
  const double a = 2.0 * (1.0 + c) / (inputs.beta * (1.0 - c));
  return a * tail / std::sqrt(n) + (2.0 + 2.0 * a) * inputs.epsilon / sigma_min;
}

double stability_bound_asymptotic(const Signal& x, const StabilityInputs& inputs, int m) {
  const double gap = std::sqrt(double(x.size())) - std::sqrt(double(m));
  if (!(gap > 0)) throw InvalidArgument("stability_bound_asymptotic: need M < N");
  return stability_bound(x, inputs, m, gap);
}

}  // namespace tvcs
