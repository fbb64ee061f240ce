#pragma once

// TV minimization programs:
//   equality   min ||Dx||_1  s.t. Ax = y
//   noisy      min ||Dx||_1  s.t. ||Ax - y||_2 <= eps
// solved by over-relaxed ADMM with the split u = Dx, plus a simplex LP
// oracle for small 1-D instances and the stability bound evaluator.

#include "tvcs/core.hpp"
#include "tvcs/operators.hpp"

namespace tvcs {

struct SolverConfig {
  int max_iters = 20000;
  double primal_tol = 1e-8;
  double dual_tol = 1e-8;
  double penalty = 1.0;
  double over_relax = 1.6;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

struct SolveReport {
  Vector solution;
  GridShape shape;
  double objective = 0.0;        ///< tv_norm(solution)
  double primal_residual = 0.0;  ///< ||A solution - y||_2
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  ///< seconds

  Signal as_signal() const { return Signal(solution); }
  MultiSignal as_multi() const { return MultiSignal(solution, shape.side, shape.dims); }
};

SolveReport tv_min_eq(const MeasurementEnsemble& a, const Vector& y, const SolverConfig& cfg = {});
SolveReport tv_min_eq(const MeasurementEnsemble& a, const Vector& y, const GridShape& shape,
                      const SolverConfig& cfg = {});

/// epsilon == 0 is delegated to tv_min_eq.
SolveReport tv_min_noise(const MeasurementEnsemble& a, const Vector& y, double epsilon,
                         const SolverConfig& cfg = {});
SolveReport tv_min_noise(const MeasurementEnsemble& a, const Vector& y, double epsilon,
                         const GridShape& shape, const SolverConfig& cfg = {});

/// Largest N accepted by the LP oracle.
inline constexpr int kLpOracleMaxN = 64;

/// Exact vertex solution of the LP form of the equality program (1-D).
/// Throws ScaleGuard for N > 64 and Infeasible when Ax = y has no solution.
Signal lp_oracle_tv_min(const MeasurementEnsemble& a, const Vector& y);

struct StabilityInputs {
  double c_balance = 0.5;  ///< C in (0, 1)
  double beta = 1.0;       ///< almost-Euclidean constant, > 0
  double delta = 0.0;      ///< sparsity fraction, support size floor(delta N)
  double epsilon = 0.0;    ///< noise level

  void validate() const;
};

/// Error bound on ||x - xhat||_2 for the noisy program:
///   a * tail / sqrt(N) + (2 + 2a) * eps / sigma_min,
/// a = 2(1+C)/(beta(1-C)), tail = ||Dx||_1 - ksum_largest(Dx, floor(delta N)).
double stability_bound(const Signal& x, const StabilityInputs& inputs, int m, double sigma_min);

/// Same bound with sigma_min replaced by sqrt(N) - sqrt(M).
double stability_bound_asymptotic(const Signal& x, const StabilityInputs& inputs, int m);

/// Euclidean projection onto {v : ||v||_1 <= radius} (sort based).
Vector project_l1_ball(const Vector& v, double radius);
/// Euclidean projection onto {v : ||v||_2 <= radius}.
Vector project_l2_ball(const Vector& v, double radius);
Vector soft_threshold(const Vector& v, double t);

}  // namespace tvcs
