#include "tvcs/lp.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tvcs {

namespace {

class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b)
      : m_(a.rows()), n_(a.cols()), t_(Matrix::Zero(a.rows() + 1, a.cols() + a.rows() + 1)) {
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b[i] < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b[i];
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }
  double objective_value() const { return -t_(m_, rhs()); }

  void set_phase_one_costs() {
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
  }

  void set_costs(const Vector& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi >= n_) continue;
      t_.row(m_) -= c[bi] * t_.row(i);
    }
  }

  // Simplex iterations restricted to columns < limit. Entering columns are
  // priced by the most negative reduced cost; after a degenerate pivot Bland's
  // rule takes over until the objective strictly improves, which rules out
  // cycling.
  LpStatus iterate(Eigen::Index limit, const LpOptions& opt, long& pivots) {
    bool bland = false;
    while (pivots < opt.max_pivots) {
      Eigen::Index enter = -1;
      double most_negative = -opt.pivot_tol;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (t_(m_, j) < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = t_(m_, j);
        }
      }
      if (enter < 0) return LpStatus::optimal;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double aij = t_(i, enter);
        if (aij <= opt.pivot_tol) continue;
        const double ratio = std::max(0.0, t_(i, rhs())) / aij;
        if (leave < 0 || ratio < best - 1e-12) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-12 &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      bland = best * std::abs(t_(m_, enter)) <= opt.pivot_tol;
      pivot(leave, enter);
      ++pivots;
    }
    return LpStatus::iteration_limit;
  }

  // Pivot artificial variables out of the basis where possible.
  void drive_out_artificials(double tol) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index best = -1;
      double mag = tol;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  Vector basic_solution() const {
    Vector z = Vector::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi < n_) z[bi] = t_(i, rhs());
    }
    return z;
  }

  std::vector<Eigen::Index> basic_columns() const {
    std::vector<Eigen::Index> cols;
    for (auto bi : basis_)
      if (bi < n_) cols.push_back(bi);
    return cols;
  }

 private:
  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    // Round-off can push basic values just below zero.
    for (Eigen::Index i = 0; i < m_; ++i)
      if (t_(i, rhs()) < 0.0 && t_(i, rhs()) > -1e-9) t_(i, rhs()) = 0.0;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c,
                           const LpOptions& options) {
  if (a.rows() != b.size() || a.cols() != c.size())
    throw InvalidArgument("solve_standard_lp: dimension mismatch");
  LpResult result;
  Tableau tab(a, b);
  const Eigen::Index n = a.cols();

  tab.set_phase_one_costs();
  LpStatus st = tab.iterate(n + a.rows(), options, result.pivots);
  if (st == LpStatus::iteration_limit) {
    result.status = st;
    return result;
  }
  if (tab.objective_value() > options.feasibility_tol * (1.0 + b.lpNorm<Eigen::Infinity>())) {
    result.status = LpStatus::infeasible;
    return result;
  }
  tab.drive_out_artificials(options.pivot_tol);

  tab.set_costs(c);
  st = tab.iterate(n, options, result.pivots);
  result.status = st;
  if (st != LpStatus::optimal) return result;

  Vector z = tab.basic_solution();
  // Re-solve the basic system from the original data to shed accumulated
  // tableau round-off.
  const auto cols = tab.basic_columns();
  if (!cols.empty()) {
    Matrix basis(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) basis.col(Eigen::Index(j)) = a.col(cols[j]);
    const Vector zb = basis.colPivHouseholderQr().solve(b);
    Vector refined = Vector::Zero(n);
    for (std::size_t j = 0; j < cols.size(); ++j) refined[cols[j]] = std::max(0.0, zb[Eigen::Index(j)]);
    if ((a * refined - b).norm() <= (a * z - b).norm()) z = refined;
  }
  result.solution = z;
  result.objective = c.dot(z);
  return result;
}

}  // namespace tvcs
