#pragma once

// Gaussian width of the relaxed sets {||x||_2 <= 1, ||Dx||_1 <= r}: Monte
// Carlo estimation, closed-form upper bounds, the alternating-tail lower
// bound construction and measurement-count predictors.

#include "tvcs/core.hpp"
#include "tvcs/operators.hpp"
#include "tvcs/solvers.hpp"

namespace tvcs {

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  double per_sample_solver_tol = 0.0;
  long rejected = 0;
};

/// Result of sup <g, x> over {||x||_2 <= 1, ||Dx||_1 <= radius}.
struct SupportValue {
  double value = 0.0;  ///< attained by a feasible point
  double upper = 0.0;  ///< dual certificate
  int iterations = 0;
  bool converged = false;
};

/// Relative duality gap accepted per inner solve for a given configuration.
double width_gap_tol(const SolverConfig& cfg);

SupportValue relaxed_support_value(const Vector& g, const GridShape& shape, double radius,
                                   const SolverConfig& cfg = {});

/// TV radius of the relaxed set: 4 sqrt(d) sqrt(k).
double relaxed_tv_radius(int k, int d);

/// Mean of sup over the relaxed set for `samples` standard Gaussian g.
/// Non-converged samples are redrawn; more than 10% rejects throws
/// EstimatorUnstable.
WidthEstimate width_mc(int n, int k, int d, long samples, const SeedSpec& seed,
                       const SolverConfig& cfg = {}, int workers = 0);

/// (4 sqrt2 + 4) (nk)^(1/4) sqrt(2 ln(e^(1/2) n)); requires n > 1, k > 1.
double width_upper_bound_1d(int n, int k);

/// Level-wise terms min{sqrt(N/2^l), 2 sqrt(2^l K)} sqrt(2 ln(e^(1/2) N/2^l))
/// summed over l = 1..L plus sqrt(2/pi); never exceeds width_upper_bound_1d.
double width_level_sum_1d(int n, int k);

/// sqrt(2^l) sqrt(2 ln(e^(1/2) N / 2^l)): bound on E||g^(l)||_inf.
double level_linf_bound(int n, int level);

/// (sqrt(pi)/4) (nk)^(1/4). Valid only for large n and k.
double width_lower_bound_1d(int n, int k);

struct MeasurementLowerBound {
  double value = 0.0;  ///< clamped at 0
  double raw = 0.0;    ///< pi/16 sqrt(nk) - 4 sqrt(ln(4/eta)) sqrt(n)
  bool vacuous = false;
};

MeasurementLowerBound measurement_lower_bound(int n, int k, double eta);

/// d = 2:  8 sqrt(d)(2^d - 1) sqrt(k) sqrt(2 ln(e^(1/2) n^d)) log2(n) + sqrt3
/// d > 2:  same with log2(n) replaced by 2^(1-d/2) / (1 - 2^(1-d/2)).
double width_upper_bound_nd(int n, int k, int d);

/// Square of the matching width upper bound (a sufficient M, not a sharp
/// one).
double required_measurements(int n, int k, int d);

struct LowerBoundConstruction {
  double mu = 0.0;
  double nu = 0.0;
  double l_block = 0.0;
  int l_int = 0;
  int h_blocks = 0;
  Signal witness{Vector::Zero(2)};
  SupportSet support;  ///< K0, |K0| = k
  double inner_product = 0.0;

  bool l2_constraint() const;  ///< nu^2 N + mu^2 K <= 1
  bool l1_constraint() const;  ///< (2K-1) mu >= 2 nu N / L
  /// ||(D x)_K0||_1 >= ||(D x)_K0c||_1 and ||x||_2 <= 1.
  bool witness_in_set() const;
};

/// Alternating-tail witness for the Gaussian vector g. Requires
/// 1 <= k <= n/3 - 1.
LowerBoundConstruction lower_bound_construction(const Vector& g, int n, int k);

/// Mean of <x(g), g> over `samples` Gaussian vectors.
WidthEstimate lower_bound_mc(int n, int k, long samples, const SeedSpec& seed);

}  // namespace tvcs
