#pragma once

// Finite differences, TV norms, support restrictions and the RelaxedNULL
// index sets.

#include "tvcs/core.hpp"

#include <Eigen/Sparse>

#include <utility>
#include <vector>

namespace tvcs {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Finite differences. For a 1-D signal of length N: N-1 entries
/// x[i+1]-x[i]. For d-D: d axis blocks (axis 0 first), each holding the
/// (N-1)*N^(d-1) differences of that axis ordered by the flat index of the
/// lower sample.
struct GradField {
  Vector values;

  Eigen::Index size() const { return values.size(); }
};

/// Strictly increasing, non-negative indices into a GradField.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<int> indices);

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(int i) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<int> indices_;
};

struct RelaxedNullSets {
  std::vector<int> dk;  ///< signal indices touched by the support
  std::vector<int> kb;  ///< disjoint differences avoiding dk
};

/// Sparse difference operator for the given grid; rows follow GradField
/// layout.
SparseMatrix difference_matrix(const GridShape& shape);

GradField diff_1d(const Signal& x);
GradField diff_nd(const MultiSignal& x);
/// Differences of a flat vector laid out as `shape`.
GradField diff(const Vector& x, const GridShape& shape);

double tv_norm(const Signal& x);
double tv_norm(const MultiSignal& x);
double tv_norm(const Vector& x, const GridShape& shape);

/// Number of entries with |g_i| > tol.
int count_nonzeros(const GradField& g, double tol = 0.0);

/// Sum of the k largest magnitudes.
double ksum_largest(const GradField& g, int k);

struct Restriction {
  double on_support = 0.0;
  double off_support = 0.0;
};

/// l1 mass of g on and off the support.
Restriction restrict_to(const GradField& g, const SupportSet& support);

RelaxedNullSets relaxed_null_sets(int n, const SupportSet& support);

/// sum_{KB}|x[i+1]-x[i]| - 2 sum_{DK}|x[i]|. Positive means the RelaxedNULL
/// inequality holds for this x.
double relaxed_null_margin(const Signal& x, const SupportSet& support);

/// Power-iteration estimate of the spectral norm of D for `shape`.
double difference_operator_norm(const GridShape& shape, int iterations, const SeedSpec& seed);

}  // namespace tvcs
