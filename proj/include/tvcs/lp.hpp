#pragma once

// Dense two-phase primal simplex for small standard-form LPs:
//   minimize c^T z  subject to  A z = b,  z >= 0.
// Bland's rule on degenerate stretches guarantees termination.

#include "tvcs/core.hpp"

namespace tvcs {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Vector solution;
  double objective = 0.0;
  long pivots = 0;
};

struct LpOptions {
  double pivot_tol = 1e-9;
  double feasibility_tol = 1e-8;
  long max_pivots = 200000;
};

LpResult solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c,
                           const LpOptions& options = {});

}  // namespace tvcs
